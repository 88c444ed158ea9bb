//! Information estimation by numerical differentiation of the log-profile
//! likelihood, and interval construction from the numeric and chain routes.

use crate::error::{Error, Result};
use crate::normal::normal_quantile;
use crate::sampler::{run_chain, summarize, Chain, ChainConfig, ChainSummary, Prior};

/// Step choice for the discretized information: `Auto` is `n^{-1/2}`,
/// `Scaled(c)` is `c * n^{-1/2}`, `Fixed(s)` is an absolute step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfoStep {
    Auto,
    Scaled(f64),
    Fixed(f64),
}

impl InfoStep {
    fn resolve(self, n: usize) -> Result<f64> {
        let root_n_inv = (n as f64).sqrt().recip();
        let s = match self {
            InfoStep::Auto => root_n_inv,
            InfoStep::Scaled(c) => c * root_n_inv,
            InfoStep::Fixed(s) => s,
        };
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "information step must be positive, got {s}"
            )));
        }
        Ok(s)
    }
}

/// Difference scheme for the discretized information. `OneSided` is the
/// default; `Symmetric` spends one more evaluation to halve the leading
/// error term.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DiffScheme {
    #[default]
    OneSided,
    Symmetric,
}

/// Discretized observed profile information at a maximizer `theta_hat`:
///
/// ```text
/// one-sided:  -2 [logpl(th + s) - logpl(th)] / (n s^2)
/// symmetric:  -[logpl(th + s) + logpl(th - s) - 2 logpl(th)] / (n s^2)
/// ```
///
/// Both are exact on quadratics for any step. Fails with
/// [`Error::NegativeCurvature`] when the estimate is not strictly positive.
pub fn discretized_information(
    mut logpl: impl FnMut(f64) -> f64,
    theta_hat: f64,
    n: usize,
    step: InfoStep,
    scheme: DiffScheme,
) -> Result<f64> {
    let s = step.resolve(n)?;
    let l0 = logpl(theta_hat);
    let n = n as f64;
    let info = match scheme {
        DiffScheme::OneSided => -2.0 * (logpl(theta_hat + s) - l0) / (n * s * s),
        DiffScheme::Symmetric => {
            -(logpl(theta_hat + s) + logpl(theta_hat - s) - 2.0 * l0) / (n * s * s)
        }
    };
    if info.is_finite() && info > 0.0 {
        Ok(info)
    } else {
        Err(Error::NegativeCurvature)
    }
}

/// Two-sided Wald interval `theta_hat -+ z_{1-alpha/2} / sqrt(n * info)`.
/// Panics on a nonpositive `info` or an `alpha` outside (0, 1).
pub fn wald_interval(theta_hat: f64, info: f64, n: usize, alpha: f64) -> (f64, f64) {
    assert!(info > 0.0, "information must be positive, got {info}");
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must be in (0,1), got {alpha}");
    let half_width = normal_quantile(1.0 - alpha / 2.0) / (n as f64 * info).sqrt();
    (theta_hat - half_width, theta_hat + half_width)
}

/// Equal-tailed credible interval from chain quantiles
/// `(alpha/2, 1 - alpha/2)`. Requires at least 100 draws.
pub fn credible_interval(chain: &Chain, alpha: f64) -> Result<(f64, f64)> {
    if chain.draws.len() < 100 {
        return Err(Error::TooFewDraws {
            got: chain.draws.len(),
            need: 100,
        });
    }
    let s = summarize(chain, 1)?;
    Ok((s.quantile(alpha / 2.0), s.quantile(1.0 - alpha / 2.0)))
}

/// Interval estimates at one level from both routes.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalPair {
    pub alpha: f64,
    pub wald: (f64, f64),
    pub credible: (f64, f64),
}

/// Point estimate, both information estimates, root-n scaled standard
/// errors (`se = 1 / sqrt(info)`), and interval estimates from both routes.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub theta_hat: f64,
    /// Discretized-second-difference information estimate.
    pub info_numeric: f64,
    /// Inverse scaled chain variance.
    pub info_mcmc: f64,
    pub se_numeric: f64,
    pub se_mcmc: f64,
    pub intervals: Vec<IntervalPair>,
    pub chain_summary: ChainSummary,
    pub chain: Chain,
    pub n: usize,
}

/// Runs the full two-route analysis around a maximizer: numeric information,
/// a Metropolis chain started at `theta_hat`, and intervals at each level in
/// `alphas`. `chain_cfg.init` is overridden with `theta_hat`.
pub fn analyze(
    mut logpl: impl FnMut(f64) -> f64,
    theta_hat: f64,
    n: usize,
    chain_cfg: &ChainConfig,
    prior: Prior,
    info_step: InfoStep,
    alphas: &[f64],
) -> Result<FitResult> {
    let info_numeric =
        discretized_information(&mut logpl, theta_hat, n, info_step, DiffScheme::OneSided)?;

    let mut cfg = chain_cfg.clone();
    cfg.init = theta_hat;
    let chain = run_chain(|t| logpl(t) + prior.log_density(t), &cfg)?;
    let chain_summary = summarize(&chain, n)?;
    let info_mcmc = chain_summary.info_from_variance;
    if !(info_mcmc.is_finite() && info_mcmc > 0.0) {
        return Err(Error::NegativeCurvature);
    }

    let intervals = alphas
        .iter()
        .map(|&alpha| {
            let wald = wald_interval(theta_hat, info_numeric, n, alpha);
            let credible = (
                chain_summary.quantile(alpha / 2.0),
                chain_summary.quantile(1.0 - alpha / 2.0),
            );
            IntervalPair {
                alpha,
                wald,
                credible,
            }
        })
        .collect();

    Ok(FitResult {
        theta_hat,
        info_numeric,
        info_mcmc,
        se_numeric: info_numeric.sqrt().recip(),
        se_mcmc: info_mcmc.sqrt().recip(),
        intervals,
        chain_summary,
        chain,
        n,
    })
}

impl FitResult {
    /// Flat `key = value` rendering.
    pub fn kv_block(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("n = {}\n", self.n));
        out.push_str(&format!("theta_hat = {}\n", self.theta_hat));
        out.push_str(&format!("info_numeric = {}\n", self.info_numeric));
        out.push_str(&format!("info_mcmc = {}\n", self.info_mcmc));
        out.push_str(&format!("se_numeric = {}\n", self.se_numeric));
        out.push_str(&format!("se_mcmc = {}\n", self.se_mcmc));
        out.push_str(&format!("chain_mean = {}\n", self.chain_summary.mean));
        out.push_str(&format!("chain_median = {}\n", self.chain_summary.median));
        out.push_str(&format!(
            "chain_variance = {}\n",
            self.chain_summary.variance
        ));
        out.push_str(&format!("accept_rate = {}\n", self.chain.accept_rate));
        out.push_str(&format!(
            "proposal_sd_used = {}\n",
            self.chain.proposal_sd_used
        ));
        for iv in &self.intervals {
            let a = iv.alpha;
            out.push_str(&format!("wald_lower_{a} = {}\n", iv.wald.0));
            out.push_str(&format!("wald_upper_{a} = {}\n", iv.wald.1));
            out.push_str(&format!("credible_lower_{a} = {}\n", iv.credible.0));
            out.push_str(&format!("credible_upper_{a} = {}\n", iv.credible.1));
        }
        out
    }

    pub fn csv_header() -> &'static str {
        "n,theta_hat,info_numeric,info_mcmc,se_numeric,se_mcmc,chain_mean,chain_median,\
         alpha,wald_lower,wald_upper,credible_lower,credible_upper"
    }

    /// One CSV row using the first interval level.
    pub fn csv_row(&self) -> String {
        let iv = &self.intervals[0];
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.theta_hat,
            self.info_numeric,
            self.info_mcmc,
            self.se_numeric,
            self.se_mcmc,
            self.chain_summary.mean,
            self.chain_summary.median,
            iv.alpha,
            iv.wald.0,
            iv.wald.1,
            iv.credible.0,
            iv.credible.1
        )
    }
}
