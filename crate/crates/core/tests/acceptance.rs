//! Acceptance criteria. Runs without the test harness and prints one
//! line per criterion.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use resolvedk_core::basespace::exp_of_shifts;
use resolvedk_core::deloc::{
    assemble_complex, chern_character, deloc_cohomology, les_of_pruning, single_node_cohomology, DelocComplex,
};
use resolvedk_core::fgab::{smith_normal_form, try_split};
use resolvedk_core::ktheory::{compare_ranks, node_equivariant_k, product_with_trivial_factor, rational_global_k};
use resolvedk_core::model::materialize_windows;
use resolvedk_core::qlin::span_dim;
use resolvedk_core::redbun::{canonicalize, check_iterated};
use resolvedk_core::{
    generate_fixture, Fixture, FgAbGroup, IntMatrix, IteratedReducedBundle, QMatrix, ResolvedAction, SectionChoice,
    Windows,
};

use common::{pruning_steps, random_action};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn fixture(name: &str, n: Option<i64>) -> Fixture {
    generate_fixture(name, n).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn deloc_dims(f: &Fixture, m: usize) -> (usize, usize) {
    let w = f.windows(m).unwrap();
    let s = f.sections(m).unwrap();
    let h = deloc_cohomology(&assemble_complex(&f.action, &s, &w, &BTreeSet::new()).unwrap());
    (h.even, h.odd)
}

fn prepared(action: &ResolvedAction, w: &Windows) -> SectionChoice {
    let mut s = SectionChoice::canonical(&action.tree).unwrap();
    s.prepare(&action.tree, w).unwrap();
    s
}

fn random_matrix(rng: &mut ChaCha8Rng) -> IntMatrix {
    let r = rng.gen_range(1..=8);
    let c = rng.gen_range(1..=8);
    let rows: Vec<Vec<BigInt>> =
        (0..r).map(|_| (0..c).map(|_| BigInt::from(rng.gen_range(-30i64..=30))).collect()).collect();
    IntMatrix::from_rows(rows, c)
}

fn c1_smith() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    for t in 0..1000 {
        let a = random_matrix(&mut rng);
        let d = smith_normal_form(&a);
        ensure!(d.u.determinant().abs() == BigInt::from(1), "matrix {t}: U not unimodular");
        ensure!(d.v.determinant().abs() == BigInt::from(1), "matrix {t}: V not unimodular");
        ensure!(&(&d.u * &a) * &d.v == d.s, "matrix {t}: U·A·V ≠ S");
        for i in 0..d.s.rows() {
            for j in 0..d.s.cols() {
                ensure!(i == j || d.s[(i, j)].is_zero(), "matrix {t}: S not diagonal");
            }
        }
        let diag = d.diagonal();
        ensure!(diag.iter().all(|x| !x.is_negative()), "matrix {t}: negative invariant");
        for w in diag.windows(2) {
            ensure!(w[0].is_zero() && w[1].is_zero() || !w[0].is_zero() && w[1].is_multiple_of(&w[0]), "matrix {t}: divisibility");
        }
        let g = a.entries().iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        ensure!(diag[0] == g, "matrix {t}: first invariant {} ≠ gcd of entries {g}", diag[0]);
        if a.rows() == a.cols() {
            let prod: BigInt = diag.iter().product();
            ensure!(prod == a.determinant().abs(), "matrix {t}: invariant product ≠ |det|");
        }
    }
    let el = start.elapsed();
    ensure!(el < Duration::from_secs(10), "took {el:?}");
    Ok(format!("1000 matrices in {el:.2?}"))
}

fn c2_no_splitting() -> Outcome {
    let f = fixture("sphere_rotation_speed", Some(2));
    let root = f.action.tree.root().unwrap();
    let d = f.action.datum(&root).unwrap();
    ensure!(d.subgroup_dual() == &FgAbGroup::cyclic(2), "root isotropy dual is {}", d.subgroup_dual());
    ensure!(try_split(d.restriction()).unwrap().is_none(), "Z → Z/2 reported a splitting");
    let w = f.windows(1).unwrap();
    let s = f.sections(1).unwrap();
    ensure!(!s.is_homomorphic(&root), "section at the root claims to be homomorphic");
    for b in &w[&root] {
        let l = s.lift(&f.action.tree, &root, b).unwrap();
        ensure!(d.subgroup_dual().elements_equal(&d.restrict(&l), b), "lift of {b:?} does not restrict back");
    }
    compare_ranks(&f.action, &s, &w, &BTreeSet::new()).map_err(|e| e.to_string())?;
    for (label, b) in &f.bundles {
        ensure!(check_iterated(&f.action, &s, b).unwrap().is_consistent(), "bundle {label} inconsistent");
        chern_character(&f.action, &s, b).map_err(|e| format!("{label}: {e}"))?;
    }
    Ok("no homomorphic section; set-theoretic section used".into())
}

fn random_sections(action: &ResolvedAction, w: &Windows, rng: &mut ChaCha8Rng) -> SectionChoice {
    let mut s = prepared(action, w);
    for (node, chars) in w {
        let d = action.datum(node).unwrap();
        let g = d.dual_group();
        for b in chars {
            let mut lift = s.lift(&action.tree, node, b).unwrap();
            for k in d.kernel_generators() {
                lift = g.add(&lift, &g.scale(&BigInt::from(rng.gen_range(-3i64..=3)), k));
            }
            s.set_override(&action.tree, node, b, lift).unwrap();
        }
    }
    s
}

fn canonical_under(f: &Fixture, s: &SectionChoice, b: &IteratedReducedBundle) -> IteratedReducedBundle {
    let nodes = b
        .nodes
        .iter()
        .map(|(id, n)| (id.clone(), canonicalize(&f.action, s, id, &n.entries).unwrap()))
        .collect();
    IteratedReducedBundle { nodes }
}

fn c3_section_independence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fixtures = [fixture("sphere_rotation_speed", Some(2)), fixture("projective_plane", None)];
    let mut pairs = 0;
    for f in &fixtures {
        let w = f.windows(1).unwrap();
        let base = deloc_dims(f, 1);
        for _ in 0..50 {
            let s1 = random_sections(&f.action, &w, &mut rng);
            let s2 = random_sections(&f.action, &w, &mut rng);
            for (label, b) in &f.bundles {
                let via1 = canonical_under(f, &s2, &canonical_under(f, &s1, b));
                let direct = canonical_under(f, &s2, b);
                ensure!(via1 == direct, "{}: bundle {label} depends on the section", f.name);
                for s in [&s1, &s2] {
                    ensure!(check_iterated(&f.action, s, b).unwrap().is_consistent(), "{}: {label} inconsistent", f.name);
                }
            }
            for s in [&s1, &s2] {
                let h = deloc_cohomology(&assemble_complex(&f.action, s, &w, &BTreeSet::new()).unwrap());
                ensure!((h.even, h.odd) == base, "{}: dims {:?} ≠ {base:?}", f.name, (h.even, h.odd));
            }
            pairs += 1;
        }
    }
    Ok(format!("{pairs} section pairs"))
}

/// Pole tables with equal total rank: `2(2m+1)` unknowns, one equation.
fn pole_pair_count(m: usize) -> usize {
    let n = 2 * m + 1;
    let row: Vec<i64> = (0..2 * n).map(|i| if i < n { 1 } else { -1 }).collect();
    2 * n - QMatrix::from_i64(1, 2 * n, &row).rank()
}

fn c4_sphere() -> Outcome {
    let start = Instant::now();
    let f = fixture("sphere_rotation", None);
    let mut seen = Vec::new();
    for m in 0..=2 {
        let w = f.windows(m).unwrap();
        let s = f.sections(m).unwrap();
        let g = rational_global_k(&f.action, &s, &w, &BTreeSet::new()).map_err(|e| e.to_string())?;
        let h = deloc_dims(&f, m);
        ensure!(h == (pole_pair_count(m), 0), "m={m}: delocalized {h:?}, count {}", pole_pair_count(m));
        ensure!((g.even, g.odd) == h, "m={m}: K-side {:?} vs {h:?}", (g.even, g.odd));
        seen.push(h.0);
    }
    ensure!(seen == [1, 5, 9], "even dims {seen:?}");
    let el = start.elapsed();
    ensure!(el < Duration::from_secs(1), "took {el:?}");
    Ok(format!("even 1, 5, 9 and odd 0 in {el:.2?}"))
}

fn c5_speed() -> Outcome {
    let base = fixture("sphere_rotation", None);
    let base_dims = deloc_dims(&base, 1);
    let root = base.action.tree.root().unwrap();
    let bw = base.windows(1).unwrap();
    let base_k = node_equivariant_k(&base.action, &root, &bw[&root]).unwrap();
    for n in [2usize, 3] {
        let f = fixture("sphere_rotation_speed", Some(n as i64));
        let dims = deloc_dims(&f, 1);
        ensure!(dims == (n * base_dims.0, n * base_dims.1), "speed {n}: {dims:?} vs {n}×{base_dims:?}");
        let p = product_with_trivial_factor(&FgAbGroup::cyclic(n as i64), &base_k).unwrap();
        let r = node_equivariant_k(&f.action, &root, &f.windows(1).unwrap()[&root]).unwrap();
        ensure!(p.ranks() == r.ranks(), "speed {n}: product K {:?} vs root K {:?}", p.ranks(), r.ranks());
        ensure!(p.ranks() == (n * base_k.ranks().0, n * base_k.ranks().1), "speed {n}: product ranks");
        let w = f.windows(1).unwrap();
        let s = f.sections(1).unwrap();
        let g = rational_global_k(&f.action, &s, &w, &BTreeSet::new()).map_err(|e| e.to_string())?;
        ensure!((g.even, g.odd) == dims, "speed {n}: K-side {:?}", (g.even, g.odd));
    }
    let prod = deloc_dims(&fixture("product_trivial", Some(2)), 1);
    let speed2 = deloc_dims(&fixture("sphere_rotation_speed", Some(2)), 1);
    ensure!(prod == speed2, "product {prod:?} vs speed 2 {speed2:?}");
    Ok(format!("base {base_dims:?}; speeds 2 and 3 scale exactly"))
}

fn all_steps_exact(action: &ResolvedAction, s: &SectionChoice, w: &Windows) -> Result<usize, String> {
    let steps = pruning_steps(action);
    for (p, alpha) in &steps {
        let les = les_of_pruning(action, s, w, p, alpha).map_err(|e| e.to_string())?;
        ensure!(les.verdict.is_exact(), "prune {alpha} after {p:?}: {:?}", les.instance);
    }
    Ok(steps.len())
}

fn c6_les() -> Outcome {
    let start = Instant::now();
    let mut n = 0;
    for (name, ms) in [("sphere_rotation", 0..=2), ("projective_plane", 0..=1)] {
        let f = fixture(name, None);
        for m in ms {
            let w = f.windows(m).unwrap();
            n += all_steps_exact(&f.action, &f.sections(m).unwrap(), &w).map_err(|e| format!("{name} m={m}: {e}"))?;
        }
    }
    for seed in 0..50 {
        let r = random_action(seed);
        let w = materialize_windows(&r.action.tree, &BTreeMap::new(), 1).unwrap();
        n += all_steps_exact(&r.action, &prepared(&r.action, &w), &w).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    let el = start.elapsed();
    ensure!(el < Duration::from_secs(30), "took {el:?}");
    Ok(format!("{n} pruning sequences exact in {el:.2?}"))
}

fn in_some_block(f: &Fixture, c: &DelocComplex, t: &resolvedk_core::deloc::ChernTuple) -> Result<bool, String> {
    for b in &c.blocks {
        let Some(v) = t.in_block(&f.action, b).map_err(|e| e.to_string())? else { continue };
        ensure!(b.d.apply(&v).iter().all(Zero::is_zero), "Chern tuple is not closed");
        let mut cols = b.even_basis.column_vecs();
        let before = span_dim(&cols, b.dim);
        cols.push(v);
        ensure!(span_dim(&cols, b.dim) == before, "Chern tuple is not a compatible tuple");
        return Ok(true);
    }
    Ok(false)
}

fn c7_chern() -> Outcome {
    let mut checked = 0;
    for name in ["sphere_rotation", "projective_plane"] {
        let f = fixture(name, None);
        let w = f.windows(1).unwrap();
        let s = f.sections(1).unwrap();
        let c = assemble_complex(&f.action, &s, &w, &BTreeSet::new()).unwrap();
        for (label, b) in &f.bundles {
            let t = chern_character(&f.action, &s, b).map_err(|e| format!("{name} {label}: {e}"))?;
            ensure!(in_some_block(&f, &c, &t)?, "{name} {label}: no block holds the tuple");
            checked += 1;
        }
        for (id, data) in &f.action.nodes {
            let Some(chern) = &data.chern else { continue };
            let n = data.complex.total_dim();
            for i in 0..data.shifts.len() {
                let mut e = vec![BigInt::zero(); data.shifts.len()];
                e[i] = BigInt::from(1);
                let fwd = exp_of_shifts(&data.complex, &data.shifts, &e);
                let neg: Vec<BigInt> = e.iter().map(|x| -x).collect();
                let back = exp_of_shifts(&data.complex, &data.shifts, &neg);
                ensure!(&fwd * &back == QMatrix::identity(n), "{name} {id}: exp(L)·exp(−L) ≠ 1");
                for g in 0..data.k.k0.ngens() {
                    let x = data.k.k0.generator(g);
                    let lhs = chern.evaluate(&data.k.shift_power_k0(&e).apply(&x));
                    let rhs = fwd.apply(&chern.evaluate(&x));
                    ensure!(lhs == rhs, "{name} {id}: ch(σx) ≠ exp(L)ch(x) for generator {g}");
                }
            }
        }
    }
    Ok(format!("{checked} bundles closed and compatible; shift twisting holds"))
}

fn node_level(action: &ResolvedAction, w: &Windows, label: &str) -> Result<usize, String> {
    let mut n = 0;
    for id in action.tree.node_ids() {
        let data = action.node(&id).unwrap();
        let k = node_equivariant_k(action, &id, &w[&id]).map_err(|e| e.to_string())?;
        let h = single_node_cohomology(action, &id, false).map_err(|e| e.to_string())?;
        let sectors = w[&id].len();
        ensure!(k.ranks() == (h.0 * sectors, h.1 * sectors), "{label} {id}: K {:?} vs forms {h:?}×{sectors}", k.ranks());
        if !action.tree.faces_of(&id).is_empty() {
            let hr = single_node_cohomology(action, &id, true).map_err(|e| e.to_string())?;
            let kr = (data.k.k0_rel.as_ref(), data.k.k1_rel.as_ref());
            let (Some(a), Some(b)) = kr else { return Err(format!("{label} {id}: no relative K")) };
            ensure!((a.free_rank(), b.free_rank()) == hr, "{label} {id}: relative K vs forms {hr:?}");
        }
        n += 1;
    }
    Ok(n)
}

fn c8_node_level() -> Outcome {
    let mut n = 0;
    for (name, p) in [("sphere_rotation", None), ("sphere_rotation_speed", Some(3)), ("product_trivial", Some(2)), ("projective_plane", None)] {
        let f = fixture(name, p);
        n += node_level(&f.action, &f.windows(1).unwrap(), name)?;
    }
    for seed in 0..50 {
        let r = random_action(seed);
        let w = materialize_windows(&r.action.tree, &BTreeMap::new(), 1).unwrap();
        n += node_level(&r.action, &w, &format!("seed {seed}"))?;
    }
    Ok(format!("{n} nodes agree"))
}

fn c9_projective_plane() -> Outcome {
    let f = fixture("projective_plane", None);
    let mut got = Vec::new();
    for m in 0..=2 {
        let w = f.windows(m).unwrap();
        let s = f.sections(m).unwrap();
        let r = compare_ranks(&f.action, &s, &w, &BTreeSet::new()).map_err(|e| format!("m={m}: {e}"))?;
        let h = deloc_dims(&f, m);
        ensure!((r.global.even, r.global.odd) == h, "m={m}: K-side differs from delocalized");
        got.push(h);
    }
    ensure!(got == [(1, 2), (5, 0), (11, 0)], "dims {got:?}");
    Ok(format!("dims {got:?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("Smith normal form on random matrices", c1_smith),
        ("non-split isotropy still computes", c2_no_splitting),
        ("independence of the section", c3_section_independence),
        ("rotated sphere dimensions", c4_sphere),
        ("speed-n scaling", c5_speed),
        ("pruning sequences exact", c6_les),
        ("Chern character", c7_chern),
        ("node-level K ranks match forms", c8_node_level),
        ("projective plane comparison", c9_projective_plane),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match r {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail})", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {e}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
