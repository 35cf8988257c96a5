//! The `garma` command-line tool.
//!
//! Exit codes: 0 on success, 2 for invalid usage or input, 1 for failures at
//! run time.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::diagnostics::{burn, summarize, thin, PosteriorSummary};
use crate::error::{GarmaError, Result};
use crate::harness::{format_report, run_scenario, write_report_csv, Scenario};
use crate::io::{
    read_chain_csv, read_series_csv, write_chain_csv, write_series_csv, write_summary_csv,
    ChainSidecar, DataOptions,
};
use crate::model::{Coef, Family, ParamState, PriorSpec};
use crate::sampler::{
    parse_coef_name, posterior_model_probs, run_chain, top_models, SamplerConfig,
};
use crate::simulate::{simulate_garma, SimSpec};

#[derive(Debug, Parser)]
#[command(
    name = "garma",
    version,
    about = "Bayesian order selection for GARMA count time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a series from a GARMA model and write it as CSV.
    Simulate(SimulateArgs),
    /// Fit a GARMA model to a data file by reversible-jump MCMC.
    Fit(FitArgs),
    /// Summarize a chain written by `fit --out-chain`.
    Summarize(SummarizeArgs),
    /// Run a Monte Carlo scenario file.
    Mc(McArgs),
}

#[derive(Debug, Args)]
struct FamilyArgs {
    /// poisson, binomial or negbinomial
    #[arg(long)]
    family: String,
    /// Binomial number of trials.
    #[arg(long)]
    m: Option<u64>,
    /// Negative binomial size.
    #[arg(long)]
    k: Option<f64>,
}

impl FamilyArgs {
    fn family(&self) -> Result<Family> {
        Family::from_parts(&self.family, self.m, self.k)
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// AR order.
    #[arg(long, default_value_t = 0)]
    p: usize,
    /// MA order.
    #[arg(long, default_value_t = 0)]
    q: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    /// Comma-separated AR coefficients (p values).
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    /// Comma-separated MA coefficients (q values).
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    warmup: usize,
    #[arg(long, default_value_t = 0.3)]
    c: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value_t = 3)]
    pmax: usize,
    #[arg(long, default_value_t = 3)]
    qmax: usize,
    #[arg(long, default_value_t = 30_000)]
    iters: usize,
    #[arg(long, default_value_t = 5_000)]
    burnin: usize,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    /// Standard deviation of birth proposals.
    #[arg(long, default_value_t = 5.0)]
    rj_scale: f64,
    /// Standard deviation of within-model random-walk proposals.
    #[arg(long, default_value_t = 0.1)]
    rw_scale: f64,
    /// Probability of attempting each birth/death move in a sweep.
    #[arg(long, default_value_t = 0.5)]
    toggle_prob: f64,
    #[arg(long, default_value_t = 0.5)]
    inc_prob: f64,
    #[arg(long, default_value_t = 0.3)]
    sd_alpha: f64,
    /// Prior standard deviation of AR and MA coefficients.
    #[arg(long, default_value_t = 0.2)]
    sd_arma: f64,
    #[arg(long, default_value_t = 4.0)]
    sd_beta: f64,
    #[arg(long, default_value_t = 0.3)]
    c: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma-separated coefficients exempt from birth/death moves, e.g.
    /// `beta_trend,phi1`.
    #[arg(long)]
    always_include: Option<String>,
    /// Add a linear trend covariate.
    #[arg(long)]
    trend: bool,
    /// Add a log-trend covariate.
    #[arg(long)]
    logtrend: bool,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Write the full chain here, with its metadata in `<path>.meta.toml`.
    #[arg(long)]
    out_chain: Option<PathBuf>,
    #[arg(long)]
    out_summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SummarizeArgs {
    #[arg(long)]
    chain: PathBuf,
    /// Metadata sidecar; defaults to `<chain>.meta.toml` when that exists.
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    burnin: usize,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Override the scenario's replication count.
    #[arg(long)]
    reps: Option<usize>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Directory receiving `<name>.csv` and `<name>.txt`.
    #[arg(long)]
    out: PathBuf,
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    run(std::env::args_os())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(&a, &mut out),
        Command::Fit(a) => cmd_fit(&a, &mut out),
        Command::Summarize(a) => cmd_summarize(&a, &mut out),
        Command::Mc(a) => cmd_mc(&a, &mut out),
    };
    match result.and_then(|_| out.flush().map_err(GarmaError::from)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("garma: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}

fn parse_list(s: Option<&str>, what: &str, len: usize) -> Result<Vec<f64>> {
    let Some(s) = s else {
        return Ok(vec![0.0; len]);
    };
    let v = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| GarmaError::Parse(format!("bad --{what} value '{t}'")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if v.len() != len {
        return Err(GarmaError::InvalidConfig(format!(
            "--{what} has {} values but the order is {len}",
            v.len()
        )));
    }
    Ok(v)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let family = a.family.family()?;
    let phi = parse_list(a.phi.as_deref(), "phi", a.p)?;
    let theta = parse_list(a.theta.as_deref(), "theta", a.q)?;
    let mut spec = SimSpec::new(
        family,
        ParamState::from_values(a.alpha, &[], &phi, &theta),
        a.n,
        a.seed,
    );
    spec.warmup = a.warmup;
    spec.c = a.c;
    let series = simulate_garma(&spec)?;
    match &a.out {
        Some(p) => {
            let mut w = create(p)?;
            write_series_csv(&series, &mut w)?;
            w.flush()?;
        }
        None => write_series_csv(&series, out)?,
    }
    Ok(())
}

fn parse_always_include(s: Option<&str>, covariate_names: &[String]) -> Result<Vec<Coef>> {
    let mut out = vec![Coef::Alpha];
    for name in s
        .unwrap_or("")
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
    {
        let c = parse_coef_name(name, covariate_names)?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

fn print_summary(s: &PosteriorSummary, out: &mut dyn Write) -> Result<()> {
    writeln!(
        out,
        "{:<14} {:>8} {:>8} {:>7} {:>8} {:>8} {:>8} {:>8} {:>8} {:>6}",
        "coef", "mean", "median", "sd", "hpd_lo", "hpd_hi", "q_lo", "q_hi", "ess", "incl"
    )?;
    for c in &s.coefs {
        writeln!(
            out,
            "{:<14} {:>8.4} {:>8.4} {:>7.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.1} {:>6.3}",
            c.name, c.mean, c.median, c.sd, c.hpd_lo, c.hpd_hi, c.q_lo, c.q_hi, c.ess, c.incl_freq
        )?;
    }
    Ok(())
}

fn fmt_z(z: Option<f64>) -> String {
    z.map_or("undefined".to_string(), |z| format!("{z:.3}"))
}

fn cmd_fit(a: &FitArgs, out: &mut dyn Write) -> Result<()> {
    let family = a.family.family()?;
    if a.burnin >= a.iters {
        return Err(GarmaError::InvalidConfig(format!(
            "--burnin {} must be smaller than --iters {}",
            a.burnin, a.iters
        )));
    }
    if a.thin == 0 {
        return Err(GarmaError::InvalidConfig(
            "--thin must be at least 1".into(),
        ));
    }
    let opts = DataOptions {
        c: a.c,
        trend: a.trend,
        logtrend: a.logtrend,
    };
    let series = read_series_csv(BufReader::new(File::open(&a.data)?), &opts)?;
    family.validate(&series)?;
    let config = SamplerConfig {
        p_max: a.pmax,
        q_max: a.qmax,
        priors: PriorSpec {
            sd_alpha: a.sd_alpha,
            sd_phi: a.sd_arma,
            sd_theta: a.sd_arma,
            sd_beta: a.sd_beta,
            inc_prob: a.inc_prob,
        },
        rj_scale: a.rj_scale,
        rw_scale: a.rw_scale,
        iters: a.iters,
        seed: a.seed,
        always_included: parse_always_include(
            a.always_include.as_deref(),
            series.covariate_names(),
        )?,
        toggle_prob: a.toggle_prob,
    };
    config.validate(series.n_covariates())?;
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(GarmaError::InvalidConfig(format!(
            "--level must lie in (0, 1), got {}",
            a.level
        )));
    }

    let chain = run_chain(&series, &family, &config)?;
    if let Some(p) = &a.out_chain {
        let mut w = create(p)?;
        write_chain_csv(&chain, &mut w)?;
        w.flush()?;
        std::fs::write(sidecar_path(p), ChainSidecar::of(&chain).to_toml()?)?;
    }
    let kept = thin(&burn(&chain, a.burnin)?, a.thin)?;
    let summary = summarize(&kept, a.level)?;
    if let Some(p) = &a.out_summary {
        let mut w = create(p)?;
        write_summary_csv(&summary, &mut w)?;
        w.flush()?;
    }

    writeln!(
        out,
        "{} GARMA({}, {}) fit: {} observations, {} iterations, {} kept",
        family,
        a.pmax,
        a.qmax,
        series.len(),
        a.iters,
        kept.rows()
    )?;
    writeln!(out)?;
    print_summary(&summary, out)?;

    writeln!(out)?;
    writeln!(out, "Geweke z (first 10% vs last 50%)")?;
    for c in &summary.coefs {
        writeln!(out, "{:<14} {:>10}", c.name, fmt_z(c.geweke_z))?;
    }

    let probs = posterior_model_probs(&kept, 0)?;
    let toggle_names: Vec<String> = kept
        .toggleable
        .iter()
        .map(|&j| kept.names[j].clone())
        .collect();
    writeln!(out)?;
    writeln!(out, "Top models")?;
    for (pattern, p) in top_models(&probs, 5) {
        writeln!(out, "{p:>7.4}  {}", pattern.describe(&toggle_names))?;
    }
    Ok(())
}

fn sidecar_path(chain: &Path) -> PathBuf {
    let mut s = chain.as_os_str().to_owned();
    s.push(".meta.toml");
    PathBuf::from(s)
}

fn cmd_summarize(a: &SummarizeArgs, out: &mut dyn Write) -> Result<()> {
    let meta_path = a.meta.clone().or_else(|| {
        let p = sidecar_path(&a.chain);
        p.exists().then_some(p)
    });
    let sidecar = match meta_path {
        Some(p) => Some(ChainSidecar::from_toml(&std::fs::read_to_string(p)?)?),
        None => None,
    };
    let chain = read_chain_csv(BufReader::new(File::open(&a.chain)?), sidecar.as_ref())?;
    if chain.rows() == 0 {
        return Err(GarmaError::InvalidSeries("chain file has no rows".into()));
    }
    let kept = thin(&burn(&chain, a.burnin)?, a.thin)?;
    let summary = summarize(&kept, a.level)?;
    match &a.out {
        Some(p) => {
            let mut w = create(p)?;
            write_summary_csv(&summary, &mut w)?;
            w.flush()?;
        }
        None => write_summary_csv(&summary, out)?,
    }
    Ok(())
}

fn cmd_mc(a: &McArgs, out: &mut dyn Write) -> Result<()> {
    let mut scenario = Scenario::load(&a.scenario)?;
    if let Some(r) = a.reps {
        scenario.replications = r;
    }
    let report = run_scenario(&scenario, a.parallel)?;
    std::fs::create_dir_all(&a.out)?;
    let mut w = create(&a.out.join(format!("{}.csv", scenario.name)))?;
    write_report_csv(&report, &mut w)?;
    w.flush()?;
    let text = format_report(&report);
    std::fs::write(a.out.join(format!("{}.txt", scenario.name)), &text)?;
    if !report.failures.is_empty() {
        eprintln!(
            "garma: {} of {} replications failed and were excluded",
            report.failures.len(),
            report.requested
        );
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}
