//! Command-line front end: fit a model, run the profile sampler, simulate
//! datasets, or run the full Monte Carlo study.
//!
//! Every invocation prints the effective seed, so any published number can
//! be reproduced. Exit codes: 0 success, 1 usage or file errors, 2 numeric
//! failures (flat or monotone likelihoods, degenerate maximizers, and the
//! like).

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use proflik::{
    credible_interval, discretized_information, run_chain, summarize, tune_censor_horizon,
    wald_interval, ChainConfig, CoxProfile, CoxSimConfig, Dataset, DiffScheme, Error, InfoStep,
    PoEvaluator, PoProfile, Prior, ProposalScale, StudyConfig,
};

#[derive(Parser)]
#[command(
    name = "proflik",
    version,
    about = "Profile-likelihood inference for semiparametric survival models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the profile maximizer and report the numeric-route information
    /// and Wald interval
    Fit(Opts),
    /// Run the profile sampler and report posterior summaries and the
    /// credible interval
    Sample(Opts),
    /// Write a simulated right-censored dataset as CSV
    Simulate(Opts),
    /// Run the Monte Carlo study and write table1.csv, table2.csv, and a
    /// run manifest
    Study(Opts),
}

impl Command {
    fn opts(&self) -> &Opts {
        match self {
            Command::Fit(o) | Command::Sample(o) | Command::Simulate(o) | Command::Study(o) => o,
        }
    }
}

#[derive(Args, Clone, Default)]
struct Opts {
    /// Model: cox | po
    #[arg(long)]
    model: Option<String>,
    /// Input dataset, CSV with header `time,event,z`
    #[arg(long)]
    data: Option<PathBuf>,
    /// Sample size for `simulate`
    #[arg(long)]
    n: Option<usize>,
    /// Replications per sample size for `study`
    #[arg(long)]
    reps: Option<usize>,
    /// Comma-separated sample sizes for `study`, e.g. 20,100,500
    #[arg(long)]
    ns: Option<String>,
    /// True regression coefficient for simulation
    #[arg(long = "theta-true")]
    theta_true: Option<f64>,
    /// Total chain length, burn-in included
    #[arg(long = "chain-length")]
    chain_length: Option<usize>,
    #[arg(long = "burn-in")]
    burn_in: Option<usize>,
    /// Keep every k-th post-burn-in draw
    #[arg(long)]
    thin: Option<usize>,
    /// Prior on theta: `flat` or `normal:MEAN:SD`
    #[arg(long)]
    prior: Option<String>,
    /// Proposal standard deviation: `auto` or a positive number
    #[arg(long = "proposal-sd")]
    proposal_sd: Option<String>,
    /// Information step: `auto` (n^{-1/2}) or a positive number
    #[arg(long)]
    step: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (`simulate`) or directory (`study`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write post-burn-in draws as a one-column CSV
    #[arg(long = "dump-draws")]
    dump_draws: Option<PathBuf>,
    /// Alias of --out for `simulate`
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Censoring horizon for `simulate`; tuned to a 0.9 event fraction
    /// when omitted
    #[arg(long = "censor-horizon")]
    censor_horizon: Option<f64>,
    /// Plain-text `key = value` defaults file; explicit flags win
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Opts {
    /// File values fill holes left by the command line.
    fn backfill(mut self, file: Opts) -> Opts {
        self.model = self.model.or(file.model);
        self.data = self.data.or(file.data);
        self.n = self.n.or(file.n);
        self.reps = self.reps.or(file.reps);
        self.ns = self.ns.or(file.ns);
        self.theta_true = self.theta_true.or(file.theta_true);
        self.chain_length = self.chain_length.or(file.chain_length);
        self.burn_in = self.burn_in.or(file.burn_in);
        self.thin = self.thin.or(file.thin);
        self.prior = self.prior.or(file.prior);
        self.proposal_sd = self.proposal_sd.or(file.proposal_sd);
        self.step = self.step.or(file.step);
        self.seed = self.seed.or(file.seed);
        self.out = self.out.or(file.out);
        self.dump_draws = self.dump_draws.or(file.dump_draws);
        self.dump = self.dump.or(file.dump);
        self.censor_horizon = self.censor_horizon.or(file.censor_horizon);
        self
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Model {
    Cox,
    Po,
}

/// Fully resolved run parameters: defaults, then config file, then flags.
struct Resolved {
    model: Model,
    data: Option<PathBuf>,
    n: Option<usize>,
    reps: Option<usize>,
    ns: Option<Vec<usize>>,
    theta_true: f64,
    chain_length: usize,
    burn_in: usize,
    thin: usize,
    prior: Prior,
    proposal_sd: ProposalScale,
    step: InfoStep,
    seed: u64,
    out: Option<PathBuf>,
    dump_draws: Option<PathBuf>,
    censor_horizon: Option<f64>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

fn resolve(opts: &Opts) -> Result<Resolved, Error> {
    let merged = match &opts.config {
        Some(path) => opts.clone().backfill(parse_config_file(path)?),
        None => opts.clone(),
    };

    let model = match merged.model.as_deref().unwrap_or("cox") {
        "cox" => Model::Cox,
        "po" => Model::Po,
        other => return Err(usage(format!("unknown model '{other}' (expected cox or po)"))),
    };
    let prior = match merged.prior.as_deref().unwrap_or("flat") {
        "flat" => Prior::Flat,
        spec if spec.starts_with("normal:") => {
            let parts: Vec<&str> = spec.splitn(3, ':').collect();
            if parts.len() != 3 {
                return Err(usage("prior must be flat or normal:MEAN:SD"));
            }
            let mean: f64 = parts[1]
                .parse()
                .map_err(|_| usage(format!("unparseable prior mean '{}'", parts[1])))?;
            let sd: f64 = parts[2]
                .parse()
                .map_err(|_| usage(format!("unparseable prior sd '{}'", parts[2])))?;
            Prior::normal(mean, sd)?
        }
        other => return Err(usage(format!("unknown prior '{other}'"))),
    };
    let proposal_sd = match merged.proposal_sd.as_deref().unwrap_or("auto") {
        "auto" => ProposalScale::Auto,
        num => ProposalScale::Fixed(
            num.parse()
                .map_err(|_| usage(format!("unparseable proposal sd '{num}'")))?,
        ),
    };
    let step = match merged.step.as_deref().unwrap_or("auto") {
        "auto" => InfoStep::Auto,
        num => InfoStep::Fixed(
            num.parse()
                .map_err(|_| usage(format!("unparseable step '{num}'")))?,
        ),
    };
    let ns = match &merged.ns {
        None => None,
        Some(raw) => {
            let mut out = Vec::new();
            for tok in raw.split(',') {
                out.push(
                    tok.trim()
                        .parse::<usize>()
                        .map_err(|_| usage(format!("unparseable sample size '{tok}'")))?,
                );
            }
            Some(out)
        }
    };

    Ok(Resolved {
        model,
        data: merged.data,
        n: merged.n,
        reps: merged.reps,
        ns,
        theta_true: merged.theta_true.unwrap_or(1.0),
        chain_length: merged.chain_length.unwrap_or(5000),
        burn_in: merged.burn_in.unwrap_or(1000),
        thin: merged.thin.unwrap_or(1),
        prior,
        proposal_sd,
        step,
        seed: merged.seed.unwrap_or(0),
        out: merged.out.or(merged.dump),
        dump_draws: merged.dump_draws,
        censor_horizon: merged.censor_horizon,
    })
}

fn parse_config_file(path: &PathBuf) -> Result<Opts, Error> {
    let text = fs::read_to_string(path)?;
    let mut opts = Opts::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {} is not key = value", idx + 1)))?;
        let key = key.trim();
        let value = value.trim().to_string();
        let parse_usize = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| usage(format!("config key {key}: unparseable '{v}'")))
        };
        let parse_f64 = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| usage(format!("config key {key}: unparseable '{v}'")))
        };
        match key {
            "model" => opts.model = Some(value),
            "data" => opts.data = Some(PathBuf::from(value)),
            "n" => opts.n = Some(parse_usize(&value)?),
            "reps" => opts.reps = Some(parse_usize(&value)?),
            "ns" => opts.ns = Some(value),
            "theta-true" => opts.theta_true = Some(parse_f64(&value)?),
            "chain-length" => opts.chain_length = Some(parse_usize(&value)?),
            "burn-in" => opts.burn_in = Some(parse_usize(&value)?),
            "thin" => opts.thin = Some(parse_usize(&value)?),
            "prior" => opts.prior = Some(value),
            "proposal-sd" => opts.proposal_sd = Some(value),
            "step" => opts.step = Some(value),
            "seed" => {
                opts.seed = Some(
                    value
                        .parse::<u64>()
                        .map_err(|_| usage(format!("config key seed: unparseable '{value}'")))?,
                )
            }
            "out" => opts.out = Some(PathBuf::from(value)),
            "dump-draws" => opts.dump_draws = Some(PathBuf::from(value)),
            "dump" => opts.dump = Some(PathBuf::from(value)),
            "censor-horizon" => opts.censor_horizon = Some(parse_f64(&value)?),
            other => return Err(usage(format!("unknown config key '{other}'"))),
        }
    }
    Ok(opts)
}

fn chain_config(r: &Resolved, init: f64) -> ChainConfig {
    ChainConfig {
        length: r.chain_length,
        burn_in: r.burn_in,
        init,
        proposal_sd: r.proposal_sd,
        target_accept: (0.20, 0.40),
        seed: r.seed,
        thin: r.thin,
    }
}

fn load_data(r: &Resolved) -> Result<Dataset, Error> {
    let path = r
        .data
        .as_ref()
        .ok_or_else(|| usage("--data is required for this command"))?;
    Dataset::load_csv(path)
}

enum FittedModel {
    Cox(CoxProfile),
    Po(PoProfile),
}

impl FittedModel {
    fn fit(model: Model, data: &Dataset) -> Result<(f64, FittedModel), Error> {
        match model {
            Model::Cox => {
                let profile = CoxProfile::new(data.clone())?;
                let theta_hat = profile.mle()?;
                Ok((theta_hat, FittedModel::Cox(profile)))
            }
            Model::Po => {
                let profile = PoProfile::new(data.clone())?;
                let theta_hat = profile.mle()?;
                Ok((theta_hat, FittedModel::Po(profile)))
            }
        }
    }

    /// Runs `body` with the profile log-likelihood. The PO variant owns a
    /// fresh warm-start evaluator for the duration of the call and maps
    /// evaluation failures to -inf (rejected by any downstream sampler).
    fn with_logpl<R>(&self, body: impl FnOnce(&mut dyn FnMut(f64) -> f64) -> R) -> R {
        match self {
            FittedModel::Cox(p) => body(&mut |t| p.log_profile_lik(t)),
            FittedModel::Po(p) => {
                let mut eval = PoEvaluator::new(p);
                body(&mut |t| eval.log_profile_lik(t).unwrap_or(f64::NEG_INFINITY))
            }
        }
    }
}

fn model_name(model: Model) -> &'static str {
    match model {
        Model::Cox => "cox",
        Model::Po => "po",
    }
}

fn cmd_fit(r: &Resolved) -> Result<String, Error> {
    let data = load_data(r)?;
    let n = data.len();
    let (theta_hat, fitted) = FittedModel::fit(r.model, &data)?;
    let info = fitted.with_logpl(|logpl| {
        discretized_information(logpl, theta_hat, n, r.step, DiffScheme::OneSided)
    })?;
    let (lo, hi) = wald_interval(theta_hat, info, n, 0.05);

    let mut out = String::new();
    let _ = writeln!(out, "command = fit");
    let _ = writeln!(out, "model = {}", model_name(r.model));
    let _ = writeln!(out, "seed = {}", r.seed);
    let _ = writeln!(out, "n = {n}");
    let _ = writeln!(out, "events = {}", data.event_count());
    let _ = writeln!(out, "theta_hat = {theta_hat}");
    let _ = writeln!(out, "info_numeric = {info}");
    let _ = writeln!(out, "se_numeric = {}", info.sqrt().recip());
    let _ = writeln!(out, "wald_95_lower = {lo}");
    let _ = writeln!(out, "wald_95_upper = {hi}");
    Ok(out)
}

fn cmd_sample(r: &Resolved) -> Result<String, Error> {
    let data = load_data(r)?;
    let n = data.len();
    let (theta_hat, fitted) = FittedModel::fit(r.model, &data)?;
    let prior = r.prior;
    let cfg = chain_config(r, theta_hat);
    let chain = fitted
        .with_logpl(|logpl| run_chain(|t| logpl(t) + prior.log_density(t), &cfg))?;
    let summary = summarize(&chain, n)?;
    let (lo, hi) = credible_interval(&chain, 0.05)?;

    if let Some(path) = &r.dump_draws {
        let mut csv = String::from("theta\n");
        for d in &chain.draws {
            let _ = writeln!(csv, "{d}");
        }
        fs::write(path, csv)?;
    }

    let mut out = String::new();
    let _ = writeln!(out, "command = sample");
    let _ = writeln!(out, "model = {}", model_name(r.model));
    let _ = writeln!(out, "seed = {}", r.seed);
    let _ = writeln!(out, "n = {n}");
    let _ = writeln!(out, "chain_length = {}", cfg.length);
    let _ = writeln!(out, "burn_in = {}", cfg.burn_in);
    let _ = writeln!(out, "thin = {}", cfg.thin);
    let _ = writeln!(out, "prior = {:?}", r.prior);
    let _ = writeln!(out, "draws = {}", chain.draws.len());
    let _ = writeln!(out, "theta_hat = {theta_hat}");
    let _ = writeln!(out, "chain_mean = {}", summary.mean);
    let _ = writeln!(out, "chain_median = {}", summary.median);
    let _ = writeln!(out, "chain_variance = {}", summary.variance);
    let _ = writeln!(out, "info_mcmc = {}", summary.info_from_variance);
    let _ = writeln!(out, "se_mcmc = {}", summary.info_from_variance.sqrt().recip());
    let _ = writeln!(out, "accept_rate = {}", chain.accept_rate);
    let _ = writeln!(out, "proposal_sd_used = {}", chain.proposal_sd_used);
    let _ = writeln!(out, "credible_95_lower = {lo}");
    let _ = writeln!(out, "credible_95_upper = {hi}");
    if let Some(w) = &chain.warning {
        let _ = writeln!(out, "warning = {w}");
    }
    Ok(out)
}

fn cmd_simulate(r: &Resolved) -> Result<String, Error> {
    if r.model != Model::Cox {
        return Err(usage("simulate supports --model cox only"));
    }
    let n = r.n.ok_or_else(|| usage("--n is required for simulate"))?;
    let out_path = r
        .out
        .clone()
        .ok_or_else(|| usage("--out (or --dump) is required for simulate"))?;
    let horizon = match r.censor_horizon {
        Some(h) => h,
        None => tune_censor_horizon(r.theta_true, n, 0.9, r.seed)?,
    };
    let data = proflik::simulate_cox(&CoxSimConfig {
        theta_true: r.theta_true,
        n,
        censor_horizon: horizon,
        seed: r.seed,
    })?;
    data.save_csv(&out_path)?;

    let mut out = String::new();
    let _ = writeln!(out, "command = simulate");
    let _ = writeln!(out, "seed = {}", r.seed);
    let _ = writeln!(out, "n = {n}");
    let _ = writeln!(out, "theta_true = {}", r.theta_true);
    let _ = writeln!(out, "censor_horizon = {horizon}");
    let _ = writeln!(out, "events = {}", data.event_count());
    let _ = writeln!(out, "out = {}", out_path.display());
    Ok(out)
}

fn cmd_study(r: &Resolved) -> Result<String, Error> {
    if r.model != Model::Cox {
        return Err(usage("study supports --model cox only"));
    }
    let ns = r
        .ns
        .clone()
        .ok_or_else(|| usage("--ns is required for study"))?;
    let reps = r.reps.ok_or_else(|| usage("--reps is required for study"))?;
    let out_dir = r
        .out
        .clone()
        .ok_or_else(|| usage("--out is required for study"))?;

    let cfg = StudyConfig {
        ns,
        reps,
        theta_true: r.theta_true,
        chain: chain_config(r, 0.0),
        prior: r.prior,
        seed: r.seed,
        target_event_fraction: 0.9,
        info_step: r.step,
    };
    let started = Instant::now();
    let summaries = proflik::run_study(&cfg)?;
    let (t1, t2) = proflik::emit_tables(&summaries, &out_dir)?;
    let manifest = proflik::write_manifest(
        &cfg,
        &summaries,
        started.elapsed().as_secs_f64(),
        &out_dir,
    )?;

    let mut out = String::new();
    let _ = writeln!(out, "command = study");
    let _ = writeln!(out, "seed = {}", r.seed);
    for s in &summaries {
        let _ = writeln!(
            out,
            "n = {}: mle_mean = {:.4}, cm_mean = {:.4}, cp95 = {:.4}, failures = {}",
            s.n, s.mle_mean, s.cm_mean, s.cp95, s.failures
        );
    }
    let _ = writeln!(out, "table1 = {}", t1.display());
    let _ = writeln!(out, "table2 = {}", t2.display());
    let _ = writeln!(out, "manifest = {}", manifest.display());
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    let resolved = match resolve(cli.command.opts()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    let result = match &cli.command {
        Command::Fit(_) => cmd_fit(&resolved),
        Command::Sample(_) => cmd_sample(&resolved),
        Command::Simulate(_) => cmd_simulate(&resolved),
        Command::Study(_) => cmd_study(&resolved),
    };
    match result {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 2 } else { 1 })
        }
    }
}
