//! Right-censored Cox data generation with a tunable censoring horizon.
//!
//! Covariates are Uniform(0,1). Event times follow the proportional-hazards
//! model with baseline cumulative hazard `exp(t) - 1`, so survival given
//! `z` is `exp(-exp(theta z) (exp(t) - 1))` and the exact inverse-transform
//! draw is `T = log(1 - exp(-theta z) * log(U))`. Censoring times are
//! Uniform[0, t_n]; the horizon `t_n` controls the expected fraction of
//! uncensored observations.
//!
//! Per observation the generator consumes, in order, one uniform for `z`,
//! one for the event time, and one for the censoring time, so a dataset is
//! a pure function of its seed.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::rng::{salt, substream};

/// Configuration for one simulated dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoxSimConfig {
    pub theta_true: f64,
    pub n: usize,
    /// Upper end of the Uniform[0, t_n] censoring distribution.
    pub censor_horizon: f64,
    pub seed: u64,
}

impl CoxSimConfig {
    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!(
                "sample size must be at least 2, got {}",
                self.n
            )));
        }
        if !(self.censor_horizon.is_finite() && self.censor_horizon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "censor horizon must be positive, got {}",
                self.censor_horizon
            )));
        }
        if !self.theta_true.is_finite() {
            return Err(Error::InvalidConfig("theta_true must be finite".into()));
        }
        Ok(())
    }
}

/// Simulates `cfg.n` observations, bit-identical for a fixed config.
pub fn simulate_cox(cfg: &CoxSimConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut obs = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let z: f64 = rng.random();
        let u_t: f64 = 1.0 - rng.random::<f64>(); // (0, 1]: keeps log finite
        let u_c: f64 = rng.random();
        let t = (1.0 - (-cfg.theta_true * z).exp() * u_t.ln()).ln();
        let c = u_c * cfg.censor_horizon;
        let (y, event) = if t <= c { (t, true) } else { (c, false) };
        obs.push(Observation::new(y, event, z)?);
    }
    Dataset::new(obs)
}

const PILOT_REPS: u64 = 200;
const TUNE_TOL: f64 = 0.01;
const HORIZON_LO: f64 = 1e-3;
const HORIZON_HI: f64 = 50.0;

/// Finds a censoring horizon whose pilot-estimated event fraction is within
/// ±0.01 of `target_event_fraction`, by bisection over [1e-3, 50].
///
/// Every candidate horizon is evaluated on the same 200 pilot replications
/// (common random numbers), which makes the pilot event fraction exactly
/// nondecreasing in the horizon and the result deterministic in `seed`.
pub fn tune_censor_horizon(
    theta_true: f64,
    n: usize,
    target_event_fraction: f64,
    seed: u64,
) -> Result<f64> {
    if !(target_event_fraction > 0.01 && target_event_fraction <= 0.99) {
        return Err(Error::InvalidConfig(format!(
            "target event fraction must lie in (0.01, 0.99], got {target_event_fraction}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "sample size must be at least 2, got {n}"
        )));
    }

    let fraction = |horizon: f64| -> Result<f64> {
        let mut events = 0usize;
        for r in 0..PILOT_REPS {
            let cfg = CoxSimConfig {
                theta_true,
                n,
                censor_horizon: horizon,
                seed: substream(seed, &[salt::TUNE, r]),
            };
            events += simulate_cox(&cfg)?.event_count();
        }
        Ok(events as f64 / (PILOT_REPS as usize * n) as f64)
    };

    let f_hi = fraction(HORIZON_HI)?;
    if f_hi < target_event_fraction - TUNE_TOL {
        return Err(Error::TuningNotBracketed {
            target: target_event_fraction,
            lo: HORIZON_LO,
            hi: HORIZON_HI,
        });
    }
    let f_lo = fraction(HORIZON_LO)?;
    if f_lo > target_event_fraction + TUNE_TOL {
        return Err(Error::TuningNotBracketed {
            target: target_event_fraction,
            lo: HORIZON_LO,
            hi: HORIZON_HI,
        });
    }

    let (mut lo, mut hi) = (HORIZON_LO, HORIZON_HI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = fraction(mid)?;
        if (f - target_event_fraction).abs() <= TUNE_TOL {
            return Ok(mid);
        }
        if f < target_event_fraction {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence(
        "censoring-horizon bisection exhausted its iteration budget".into(),
    ))
}
