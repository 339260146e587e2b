use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPoolBuilder;

use dynmap::channel::projector_depolarizing;
use dynmap::diagnostics::{blp_scan, cp_divisibility_scan, default_qubit_pairs, BLP_STEP, BLP_TOL, DIVISIBILITY_TOL};
use dynmap::mixture::{g_sin2, MixtureDecomposition};

fn grid(n: usize) -> Vec<f64> {
    (0..=n).map(|i| 10.0 * i as f64 / n as f64).collect()
}

fn scans(c: &mut Criterion) {
    let dec = MixtureDecomposition::new(g_sin2(1.0, 0.75, 0.75).unwrap());
    let fam = dec.family1(projector_depolarizing(2)).unwrap();
    let pairs = default_qubit_pairs(0);
    let tg = grid(1000);
    let pools = [
        ("sequential", ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("parallel", ThreadPoolBuilder::new().build().unwrap()),
    ];

    let mut group = c.benchmark_group("divisibility");
    for (name, pool) in &pools {
        group.bench_with_input(BenchmarkId::from_parameter(name), &tg, |b, tg| {
            b.iter(|| pool.install(|| cp_divisibility_scan(&fam, tg, 0.01, DIVISIBILITY_TOL).unwrap()))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("blp");
    for (name, pool) in &pools {
        group.bench_with_input(BenchmarkId::from_parameter(name), &tg, |b, tg| {
            b.iter(|| pool.install(|| blp_scan(&fam, tg, &pairs, BLP_STEP, BLP_TOL).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, scans);
criterion_main!(benches);
