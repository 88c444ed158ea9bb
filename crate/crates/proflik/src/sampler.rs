//! Random-walk Metropolis over the posterior profile distribution and
//! posterior summaries.
//!
//! The target density is proportional to `pl(theta) * rho(theta)`, supplied
//! as a log-posterior callback. Proposals are symmetric normal steps; a
//! proposal is accepted with probability `min(1, exp(delta))`. When the
//! proposal scale is `Auto`, 200-step pilot phases during burn-in double or
//! halve the scale while the phase acceptance rate sits above or below the
//! target band; adaptation freezes when burn-in ends, so post-burn-in draws
//! come from a fixed kernel.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

const PILOT_PHASE_LEN: usize = 200;

/// Prior on the parametric component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prior {
    /// Lebesgue prior: log-density 0 everywhere.
    Flat,
    Normal { mean: f64, sd: f64 },
}

impl Prior {
    pub fn normal(mean: f64, sd: f64) -> Result<Prior> {
        if !(sd.is_finite() && sd > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "normal prior sd must be positive, got {sd}"
            )));
        }
        Ok(Prior::Normal { mean, sd })
    }

    pub fn log_density(&self, theta: f64) -> f64 {
        match *self {
            Prior::Flat => 0.0,
            Prior::Normal { mean, sd } => {
                let u = (theta - mean) / sd;
                -0.5 * u * u - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
        }
    }
}

/// Proposal standard deviation: a fixed value, or tuned during burn-in
/// starting from `2.4 / sqrt(-curvature of the log-posterior at init)`
/// (falling back to 1.0 when that curvature is unavailable).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProposalScale {
    Auto,
    Fixed(f64),
}

/// Chain parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    /// Total steps, burn-in included.
    pub length: usize,
    pub burn_in: usize,
    /// Start state; use the maximizer when one is available.
    pub init: f64,
    pub proposal_sd: ProposalScale,
    /// Acceptance band targeted by burn-in adaptation.
    pub target_accept: (f64, f64),
    pub seed: u64,
    /// Keep every `thin`-th post-burn-in state.
    pub thin: usize,
}

impl ChainConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            length: 5000,
            burn_in: 1000,
            init: 0.0,
            proposal_sd: ProposalScale::Auto,
            target_accept: (0.20, 0.40),
            seed,
            thin: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.burn_in >= self.length {
            return Err(Error::InvalidConfig(format!(
                "burn-in {} must be smaller than chain length {}",
                self.burn_in, self.length
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be positive".into()));
        }
        if let ProposalScale::Fixed(sd) = self.proposal_sd {
            if !(sd.is_finite() && sd > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "proposal sd must be positive, got {sd}"
                )));
            }
        }
        let (lo, hi) = self.target_accept;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "target acceptance band must satisfy 0 < lo < hi < 1, got [{lo}, {hi}]"
            )));
        }
        if !self.init.is_finite() {
            return Err(Error::InvalidConfig("chain init must be finite".into()));
        }
        Ok(())
    }
}

/// Post-burn-in, post-thinning draws plus bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub draws: Vec<f64>,
    /// Acceptance fraction over the post-burn-in steps.
    pub accept_rate: f64,
    /// Proposal scale in force after adaptation froze.
    pub proposal_sd_used: f64,
    pub seed: u64,
    /// Set when the post-adaptation acceptance rate left [0.05, 0.95].
    pub warning: Option<String>,
}

/// Runs the Metropolis random walk. The draw sequence is a pure function of
/// `(logpost, cfg)`; adding a constant to `logpost` changes nothing.
pub fn run_chain(mut logpost: impl FnMut(f64) -> f64, cfg: &ChainConfig) -> Result<Chain> {
    cfg.validate()?;
    let mut theta = cfg.init;
    let mut lp = logpost(theta);
    if !lp.is_finite() {
        return Err(Error::NonFiniteLogPost { at: theta });
    }

    let (mut sd, adapt) = match cfg.proposal_sd {
        ProposalScale::Fixed(s) => (s, false),
        ProposalScale::Auto => (initial_scale(&mut logpost, cfg.init, lp), true),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let post_steps = cfg.length - cfg.burn_in;
    let mut draws = Vec::with_capacity(post_steps / cfg.thin);
    let mut accepted_post = 0usize;
    let mut accepted_phase = 0usize;

    for step in 0..cfg.length {
        let noise: f64 = rng.sample(StandardNormal);
        let proposal = theta + sd * noise;
        let lp_prop = logpost(proposal);
        let u: f64 = rng.random();
        // NaN log-posterior compares false and is rejected
        let accept = u.ln() < lp_prop - lp;
        if accept {
            theta = proposal;
            lp = lp_prop;
        }

        if step < cfg.burn_in {
            if adapt {
                accepted_phase += usize::from(accept);
                if (step + 1) % PILOT_PHASE_LEN == 0 {
                    let rate = accepted_phase as f64 / PILOT_PHASE_LEN as f64;
                    if rate > cfg.target_accept.1 {
                        sd *= 2.0;
                    } else if rate < cfg.target_accept.0 {
                        sd *= 0.5;
                    }
                    accepted_phase = 0;
                }
            }
        } else {
            accepted_post += usize::from(accept);
            let k = step - cfg.burn_in + 1;
            if k.is_multiple_of(cfg.thin) {
                draws.push(theta);
            }
        }
    }

    let accept_rate = accepted_post as f64 / post_steps as f64;
    let warning = (!(0.05..=0.95).contains(&accept_rate)).then(|| {
        format!("acceptance rate {accept_rate:.3} outside [0.05, 0.95] after adaptation")
    });
    Ok(Chain {
        draws,
        accept_rate,
        proposal_sd_used: sd,
        seed: cfg.seed,
        warning,
    })
}

/// Crude curvature of the log-posterior at the start state; differences make
/// the estimate invariant to constant offsets.
fn initial_scale(logpost: &mut impl FnMut(f64) -> f64, init: f64, lp_init: f64) -> f64 {
    let h = 1e-3 * init.abs().max(1.0);
    let up = logpost(init + h);
    let down = logpost(init - h);
    if !(up.is_finite() && down.is_finite()) {
        return 1.0;
    }
    let curvature = (up + down - 2.0 * lp_init) / (h * h);
    if curvature < -1e-12 {
        2.4 / (-curvature).sqrt()
    } else {
        1.0
    }
}

/// Posterior summaries of a chain; quantiles interpolate order statistics
/// linearly (plotting positions (k-1)/(m-1), the "type 7" convention).
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSummary {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub median: f64,
    /// `1 / (n * variance)`: the chain-based information estimate, where `n`
    /// is the sample size behind the likelihood.
    pub info_from_variance: f64,
    sorted: Vec<f64>,
}

impl ChainSummary {
    /// Empirical quantile of the draws; nondecreasing in `alpha` and equal to
    /// the median at 0.5. Panics outside (0, 1).
    pub fn quantile(&self, alpha: f64) -> f64 {
        quantile_sorted(&self.sorted, alpha)
    }
}

/// Summarizes a chain of at least 100 draws; `n` is the sample size of the
/// dataset behind the log-likelihood.
pub fn summarize(chain: &Chain, n: usize) -> Result<ChainSummary> {
    let m = chain.draws.len();
    if m < 100 {
        return Err(Error::TooFewDraws { got: m, need: 100 });
    }
    let mean = chain.draws.iter().sum::<f64>() / m as f64;
    let variance = chain
        .draws
        .iter()
        .map(|x| (x - mean) * (x - mean))
        .sum::<f64>()
        / (m - 1) as f64;
    let mut sorted = chain.draws.clone();
    sorted.sort_by(f64::total_cmp);
    let median = quantile_sorted(&sorted, 0.5);
    Ok(ChainSummary {
        mean,
        variance,
        median,
        info_from_variance: 1.0 / (n as f64 * variance),
        sorted,
    })
}

/// Empirical `alpha`-quantile of the draws. Panics outside (0, 1).
pub fn chain_quantile(chain: &Chain, alpha: f64) -> f64 {
    let mut sorted = chain.draws.clone();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, alpha)
}

/// Root-n standardized quantile `sqrt(n) * (quantile(alpha) - theta_hat)`.
pub fn kappa_quantile(chain: &Chain, alpha: f64, n: usize, theta_hat: f64) -> f64 {
    (n as f64).sqrt() * (chain_quantile(chain, alpha) - theta_hat)
}

fn quantile_sorted(sorted: &[f64], alpha: f64) -> f64 {
    assert!(
        alpha > 0.0 && alpha < 1.0,
        "quantile level must be in (0,1), got {alpha}"
    );
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let m = sorted.len();
    let h = (m - 1) as f64 * alpha;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < m {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[m - 1]
    }
}
