//! Monte Carlo study: per sample size, simulate replications, fit the Cox
//! maximizer and the profile sampler on each, and aggregate the two-route
//! comparison statistics.
//!
//! Replications are embarrassingly parallel. Each one derives its own RNG
//! substreams from `(seed, n, replication index)`, and aggregation folds the
//! results in replication order, so the output is bit-identical regardless
//! of the worker count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::cox::CoxProfile;
use crate::error::{Error, Result};
use crate::inference::{analyze, InfoStep};
use crate::rng::{salt, substream};
use crate::sampler::{ChainConfig, Prior};
use crate::sim::{simulate_cox, tune_censor_horizon, CoxSimConfig};

/// Study parameters. The `chain.seed` and `chain.init` fields are ignored:
/// every replication derives its own chain seed and starts at its own
/// maximizer.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub ns: Vec<usize>,
    pub reps: usize,
    pub theta_true: f64,
    pub chain: ChainConfig,
    pub prior: Prior,
    pub seed: u64,
    /// Event fraction the censoring horizon is tuned to, once per sample
    /// size.
    pub target_event_fraction: f64,
    pub info_step: InfoStep,
}

impl StudyConfig {
    pub fn new(ns: Vec<usize>, reps: usize, seed: u64) -> Self {
        Self {
            ns,
            reps,
            theta_true: 1.0,
            chain: ChainConfig::new(seed),
            prior: Prior::Flat,
            seed,
            target_event_fraction: 0.9,
            info_step: InfoStep::Auto,
        }
    }
}

/// Scaled two-route differences of the aggregate estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledDiffs {
    /// `n * |mle_mean - cm_mean|`
    pub n_absdiff_est: f64,
    /// `sqrt(n) * |se_m_mean - se_n_mean|`
    pub sqrtn_absdiff_se: f64,
    /// `n * |credible lower bound mean - Wald lower bound mean|`
    pub n_absdiff_lb: f64,
    /// `n * |credible upper bound mean - Wald upper bound mean|`
    pub n_absdiff_ub: f64,
}

/// Aggregates for one sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    pub n: usize,
    /// Successful replications entering the aggregates.
    pub reps: usize,
    pub failures: usize,
    /// Tuned censoring horizon used by every replication at this `n`.
    pub censor_horizon: f64,
    pub mle_mean: f64,
    /// Mean of the per-replication chain means.
    pub cm_mean: f64,
    /// Root mean squared maximizer-vs-chain-mean difference.
    pub rmsd_e: f64,
    pub se_m_mean: f64,
    pub se_n_mean: f64,
    /// Root mean squared difference of the two standard-error estimates.
    pub rmsd_v: f64,
    /// Fraction of replications whose 95% credible interval covers the
    /// true parameter.
    pub cp95: f64,
    /// Same for the Wald interval (recorded alongside, reported in the
    /// manifest).
    pub cp95_wald: f64,
    pub lb_m_mean: f64,
    pub lb_n_mean: f64,
    pub ub_m_mean: f64,
    pub ub_n_mean: f64,
    pub scaled: ScaledDiffs,
}

#[derive(Debug, Clone, Copy)]
struct RepResult {
    theta_hat: f64,
    cm: f64,
    se_m: f64,
    se_n: f64,
    credible: (f64, f64),
    wald: (f64, f64),
}

fn run_replication(cfg: &StudyConfig, n: usize, rep: usize, horizon: f64) -> Result<RepResult> {
    let sim_cfg = CoxSimConfig {
        theta_true: cfg.theta_true,
        n,
        censor_horizon: horizon,
        seed: substream(cfg.seed, &[salt::SIM, n as u64, rep as u64]),
    };
    let data = simulate_cox(&sim_cfg)?;
    let profile = CoxProfile::new(data)?;
    let theta_hat = profile.mle()?;

    let mut chain_cfg = cfg.chain.clone();
    chain_cfg.seed = substream(cfg.seed, &[salt::CHAIN, n as u64, rep as u64]);
    let fit = analyze(
        |t| profile.log_profile_lik(t),
        theta_hat,
        n,
        &chain_cfg,
        cfg.prior,
        cfg.info_step,
        &[0.05],
    )?;
    let iv = &fit.intervals[0];
    Ok(RepResult {
        theta_hat,
        cm: fit.chain_summary.mean,
        se_m: fit.se_mcmc,
        se_n: fit.se_numeric,
        credible: iv.credible,
        wald: iv.wald,
    })
}

/// Runs the full study. Failed replications (all-censored draws, flat or
/// monotone likelihoods) are excluded and counted; the study aborts when
/// more than 5% of the replications at any sample size fail.
pub fn run_study(cfg: &StudyConfig) -> Result<Vec<SimSummary>> {
    if cfg.reps == 0 {
        return Err(Error::InvalidConfig("reps must be at least 1".into()));
    }
    if cfg.ns.is_empty() {
        return Err(Error::InvalidConfig("no sample sizes given".into()));
    }
    if let Some(&n) = cfg.ns.iter().find(|&&n| n < 10) {
        return Err(Error::InvalidConfig(format!(
            "sample sizes below 10 are not supported, got {n}"
        )));
    }

    let mut summaries = Vec::with_capacity(cfg.ns.len());
    for &n in &cfg.ns {
        let horizon = tune_censor_horizon(
            cfg.theta_true,
            n,
            cfg.target_event_fraction,
            substream(cfg.seed, &[salt::TUNE, n as u64]),
        )?;

        let results: Vec<Result<RepResult>> = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| run_replication(cfg, n, rep, horizon))
            .collect();

        let failures = results.iter().filter(|r| r.is_err()).count();
        if failures as f64 > 0.05 * cfg.reps as f64 {
            return Err(Error::TooManyFailures {
                failed: failures,
                total: cfg.reps,
            });
        }
        let ok: Vec<RepResult> = results.into_iter().flatten().collect();
        summaries.push(aggregate(n, &ok, failures, horizon, cfg.theta_true));
    }
    Ok(summaries)
}

fn aggregate(
    n: usize,
    reps: &[RepResult],
    failures: usize,
    censor_horizon: f64,
    theta_true: f64,
) -> SimSummary {
    let m = reps.len() as f64;
    let mean = |f: &dyn Fn(&RepResult) -> f64| reps.iter().map(f).sum::<f64>() / m;

    let mle_mean = mean(&|r| r.theta_hat);
    let cm_mean = mean(&|r| r.cm);
    let rmsd_e = mean(&|r| (r.theta_hat - r.cm) * (r.theta_hat - r.cm)).sqrt();
    let se_m_mean = mean(&|r| r.se_m);
    let se_n_mean = mean(&|r| r.se_n);
    let rmsd_v = mean(&|r| (r.se_m - r.se_n) * (r.se_m - r.se_n)).sqrt();
    let covered = |iv: (f64, f64)| iv.0 <= theta_true && theta_true <= iv.1;
    let cp95 = mean(&|r| f64::from(covered(r.credible)));
    let cp95_wald = mean(&|r| f64::from(covered(r.wald)));
    let lb_m_mean = mean(&|r| r.credible.0);
    let ub_m_mean = mean(&|r| r.credible.1);
    let lb_n_mean = mean(&|r| r.wald.0);
    let ub_n_mean = mean(&|r| r.wald.1);

    let nf = n as f64;
    SimSummary {
        n,
        reps: reps.len(),
        failures,
        censor_horizon,
        mle_mean,
        cm_mean,
        rmsd_e,
        se_m_mean,
        se_n_mean,
        rmsd_v,
        cp95,
        cp95_wald,
        lb_m_mean,
        lb_n_mean,
        ub_m_mean,
        ub_n_mean,
        scaled: ScaledDiffs {
            n_absdiff_est: nf * (mle_mean - cm_mean).abs(),
            sqrtn_absdiff_se: nf.sqrt() * (se_m_mean - se_n_mean).abs(),
            n_absdiff_lb: nf * (lb_m_mean - lb_n_mean).abs(),
            n_absdiff_ub: nf * (ub_m_mean - ub_n_mean).abs(),
        },
    }
}

/// Writes `table1.csv` (per-n estimate aggregates) and `table2.csv` (scaled
/// two-route differences) into `out_dir`, all numbers at 4 decimal places.
/// Returns the two paths.
pub fn emit_tables<P: AsRef<Path>>(
    summaries: &[SimSummary],
    out_dir: P,
) -> Result<(PathBuf, PathBuf)> {
    if summaries.is_empty() {
        return Err(Error::InvalidConfig("no summaries to write".into()));
    }
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;

    let mut t1 = String::from("n,MLE,CM,rmsd_E,SE_M,SE_N,rmsd_V,CP95\n");
    for s in summaries {
        let _ = writeln!(
            t1,
            "{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
            s.n, s.mle_mean, s.cm_mean, s.rmsd_e, s.se_m_mean, s.se_n_mean, s.rmsd_v, s.cp95
        );
    }
    let p1 = dir.join("table1.csv");
    fs::write(&p1, t1)?;

    let mut t2 = String::from("n,n_absdiff_est,sqrtn_absdiff_se,n_absdiff_lb,n_absdiff_ub\n");
    for s in summaries {
        let _ = writeln!(
            t2,
            "{},{:.4},{:.4},{:.4},{:.4}",
            s.n,
            s.scaled.n_absdiff_est,
            s.scaled.sqrtn_absdiff_se,
            s.scaled.n_absdiff_lb,
            s.scaled.n_absdiff_ub
        );
    }
    let p2 = dir.join("table2.csv");
    fs::write(&p2, t2)?;

    Ok((p1, p2))
}

/// Writes the run manifest: seed, configuration, per-n tuning results and
/// failure counts, Wald coverage, and wall time.
pub fn write_manifest<P: AsRef<Path>>(
    cfg: &StudyConfig,
    summaries: &[SimSummary],
    wall_seconds: f64,
    out_dir: P,
) -> Result<PathBuf> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut out = String::new();
    out.push_str(&format!("seed = {}\n", cfg.seed));
    out.push_str(&format!(
        "ns = {}\n",
        cfg.ns
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(",")
    ));
    out.push_str(&format!("reps = {}\n", cfg.reps));
    out.push_str(&format!("theta_true = {}\n", cfg.theta_true));
    out.push_str(&format!("chain_length = {}\n", cfg.chain.length));
    out.push_str(&format!("burn_in = {}\n", cfg.chain.burn_in));
    out.push_str(&format!("thin = {}\n", cfg.chain.thin));
    out.push_str(&format!("prior = {:?}\n", cfg.prior));
    out.push_str(&format!("proposal_sd = {:?}\n", cfg.chain.proposal_sd));
    out.push_str(&format!("info_step = {:?}\n", cfg.info_step));
    out.push_str(&format!(
        "target_event_fraction = {}\n",
        cfg.target_event_fraction
    ));
    for s in summaries {
        out.push_str(&format!(
            "n_{}: censor_horizon = {:.6}, failures = {}, cp95_wald = {:.4}\n",
            s.n, s.censor_horizon, s.failures, s.cp95_wald
        ));
    }
    out.push_str(&format!("wall_seconds = {wall_seconds:.3}\n"));
    let path = dir.join("manifest.txt");
    fs::write(&path, out)?;
    Ok(path)
}
