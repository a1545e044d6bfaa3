use std::collections::BTreeSet;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use resolvedk_core::deloc::{assemble_complex, deloc_cohomology};
use resolvedk_core::fgab::{smith_normal_form, IntMatrix};
use resolvedk_core::generate_fixture;

/// Deterministic `n × n` matrix with entries in `-20..=20`.
fn matrix(n: usize, seed: u64) -> IntMatrix {
    let mut x = seed;
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    ((x >> 33) % 41) as i64 - 20
                })
                .collect()
        })
        .collect();
    let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
    IntMatrix::from_i64(&refs)
}

fn snf(c: &mut Criterion) {
    let mut g = c.benchmark_group("smith_normal_form");
    for n in [4, 8, 12] {
        let m = matrix(n, n as u64);
        g.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| smith_normal_form(black_box(m))));
    }
    g.finish();
}

fn deloc(c: &mut Criterion) {
    let mut g = c.benchmark_group("deloc_cohomology");
    g.sample_size(10);
    for (name, m) in [("sphere_rotation", 4), ("projective_plane", 1)] {
        let f = generate_fixture(name, None).unwrap();
        let w = f.windows(m).unwrap();
        let s = f.sections(m).unwrap();
        g.bench_function(BenchmarkId::new(name, m), |b| {
            b.iter(|| deloc_cohomology(&assemble_complex(&f.action, &s, &w, &BTreeSet::new()).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, snf, deloc);
criterion_main!(benches);
