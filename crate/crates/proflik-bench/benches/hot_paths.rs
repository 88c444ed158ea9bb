//! Hot paths of the sampling pipeline: one profile-likelihood evaluation
//! (called thousands of times per chain), the maximizer, a full chain, and
//! the warm-started inner solve of the proportional-odds profile.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use proflik::{run_chain, ChainConfig, CoxProfile, PoEvaluator, PoProfile};
use proflik_bench::fixture;

fn bench_cox_loglik(c: &mut Criterion) {
    let mut group = c.benchmark_group("cox_log_profile_lik");
    for n in [100usize, 1000, 10_000] {
        let profile = CoxProfile::new(fixture(n, 42)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &profile, |b, p| {
            b.iter(|| black_box(p.log_profile_lik(black_box(0.9))))
        });
    }
    group.finish();
}

fn bench_cox_mle(c: &mut Criterion) {
    let profile = CoxProfile::new(fixture(1000, 7)).unwrap();
    c.bench_function("cox_mle_n1000", |b| {
        b.iter(|| black_box(profile.mle().unwrap()))
    });
}

fn bench_chain(c: &mut Criterion) {
    let profile = CoxProfile::new(fixture(500, 11)).unwrap();
    let mut cfg = ChainConfig::new(3);
    cfg.length = 1000;
    cfg.burn_in = 200;
    cfg.init = profile.mle().unwrap();
    c.bench_function("metropolis_1000_steps_n500", |b| {
        b.iter(|| black_box(run_chain(|t| profile.log_profile_lik(t), &cfg).unwrap()))
    });
}

fn bench_po_inner(c: &mut Criterion) {
    // a dataset with tail censoring so the inner maximizer exists
    let data = fixture(60, 8).sort_by_time();
    let profile = PoProfile::new(data).unwrap();
    c.bench_function("po_profile_inner_cold_n60", |b| {
        b.iter(|| black_box(profile.profile_inner(black_box(0.4)).unwrap()))
    });
    c.bench_function("po_profile_inner_warm_sweep_n60", |b| {
        b.iter(|| {
            let mut eval = PoEvaluator::new(&profile);
            let mut acc = 0.0;
            for k in 0..20 {
                acc += eval.log_profile_lik(0.3 + 0.01 * k as f64).unwrap();
            }
            black_box(acc)
        })
    });
}

criterion_group!(
    benches,
    bench_cox_loglik,
    bench_cox_mle,
    bench_chain,
    bench_po_inner
);
criterion_main!(benches);
