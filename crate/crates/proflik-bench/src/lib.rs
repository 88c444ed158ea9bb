//! Benchmark-only crate; see `benches/hot_paths.rs`.

/// Simulated Cox dataset fixtures shared by the benchmarks.
pub fn fixture(n: usize, seed: u64) -> proflik::Dataset {
    proflik::simulate_cox(&proflik::CoxSimConfig {
        theta_true: 1.0,
        n,
        censor_horizon: 2.0,
        seed,
    })
    .expect("valid config")
}
