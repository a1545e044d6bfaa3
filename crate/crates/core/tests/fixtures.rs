use std::collections::BTreeSet;

use resolvedk_core::deloc::{assemble_complex, deloc_cohomology};
use resolvedk_core::fixtures::{generate_fixture, Fixture};

fn check_expected(f: &Fixture) {
    for e in &f.expected {
        let w = f.windows(e.window).unwrap();
        let s = f.sections(e.window).unwrap();
        let c = assemble_complex(&f.action, &s, &w, &BTreeSet::new()).unwrap();
        assert!(c.d_squared_zero(), "{} m={}", f.name, e.window);
        let h = deloc_cohomology(&c);
        assert_eq!((h.even, h.odd), (e.even, e.odd), "{} m={}", f.name, e.window);
    }
}

#[test]
fn sphere_matches_expected() {
    check_expected(&generate_fixture("sphere_rotation", None).unwrap());
}

#[test]
fn speed_three_matches_expected() {
    check_expected(&generate_fixture("sphere_rotation_speed", Some(3)).unwrap());
}

#[test]
fn product_matches_expected() {
    check_expected(&generate_fixture("product_trivial", Some(2)).unwrap());
}

#[test]
fn projective_plane_matches_expected() {
    check_expected(&generate_fixture("projective_plane", None).unwrap());
}
