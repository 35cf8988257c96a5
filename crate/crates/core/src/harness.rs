//! Monte Carlo experiments: simulate many series from a known model, fit each
//! one under a grid of proposal scales, burn-in lengths and thinning lags, and
//! average the posterior summaries.
//!
//! Replication `i` simulates its series with `derive_seed(seed, i)`; the chain
//! for the `j`-th proposal scale uses `derive_seed(derive_seed(seed, i), j + 1)`.
//! Any replication can therefore be rerun alone, and reports do not depend on
//! how many worker threads were used.
//!
//! Scenario files are TOML:
//!
//! ```toml
//! name = "gar2"
//! family = "binomial"     # poisson | binomial | negbinomial
//! m = 15                  # binomial only; `k = ...` for negbinomial
//! n = 1000
//! replications = 100
//! seed = 1
//! burn_grid = [0, 3000]
//! thin_grid = [1]         # optional, default [1]
//! sigma_grid = [5.0]
//! level = 0.95            # optional
//! warmup = 100            # optional
//! c = 0.3                 # optional
//!
//! [truth]
//! alpha = -1.0
//! phi = [0.0, -0.4]       # padded with zeros up to p_max
//! theta = []
//!
//! [sampler]               # optional, every key has a default
//! p_max = 3
//! q_max = 3
//! iters = 30000
//! rw_scale = 0.1
//! toggle_prob = 0.5
//! inc_prob = 0.5
//! sd_alpha = 0.3
//! sd_phi = 0.2
//! sd_theta = 0.2
//! ```

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use crate::diagnostics::{burn, classify_model, summarize, thin, IntervalKind, PosteriorSummary};
use crate::error::{GarmaError, Result};
use crate::model::{Family, ParamState, PriorSpec};
use crate::sampler::{run_chain, SamplerConfig};
use crate::seed::derive_seed;
use crate::simulate::{simulate_garma, SimSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub family: Family,
    /// Data-generating parameters, padded to the sampler's maximum orders.
    pub truth: ParamState,
    pub n: usize,
    pub warmup: usize,
    pub c: f64,
    pub replications: usize,
    pub seed: u64,
    /// `rj_scale` and `seed` are overridden per chain.
    pub sampler: SamplerConfig,
    pub burn_grid: Vec<usize>,
    pub thin_grid: Vec<usize>,
    pub sigma_grid: Vec<f64>,
    pub level: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: Option<String>,
    family: String,
    m: Option<u64>,
    k: Option<f64>,
    n: usize,
    replications: usize,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_warmup")]
    warmup: usize,
    #[serde(default = "default_c")]
    c: f64,
    #[serde(default = "default_level")]
    level: f64,
    burn_grid: Vec<usize>,
    #[serde(default = "default_thin_grid")]
    thin_grid: Vec<usize>,
    sigma_grid: Vec<f64>,
    truth: TruthFile,
    #[serde(default)]
    sampler: SamplerFile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TruthFile {
    alpha: f64,
    #[serde(default)]
    phi: Vec<f64>,
    #[serde(default)]
    theta: Vec<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplerFile {
    p_max: Option<usize>,
    q_max: Option<usize>,
    iters: Option<usize>,
    rw_scale: Option<f64>,
    toggle_prob: Option<f64>,
    inc_prob: Option<f64>,
    sd_alpha: Option<f64>,
    sd_phi: Option<f64>,
    sd_theta: Option<f64>,
}

fn default_seed() -> u64 {
    1
}
fn default_warmup() -> usize {
    100
}
fn default_c() -> f64 {
    0.3
}
fn default_level() -> f64 {
    0.95
}
fn default_thin_grid() -> Vec<usize> {
    vec![1]
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Scenario> {
        let f: ScenarioFile = toml::from_str(text).map_err(|e| GarmaError::Parse(e.to_string()))?;
        let family = Family::from_parts(&f.family, f.m, f.k)?;
        let d = SamplerConfig::default();
        let dp = PriorSpec::default();
        let sampler = SamplerConfig {
            p_max: f.sampler.p_max.unwrap_or(d.p_max),
            q_max: f.sampler.q_max.unwrap_or(d.q_max),
            iters: f.sampler.iters.unwrap_or(d.iters),
            rw_scale: f.sampler.rw_scale.unwrap_or(d.rw_scale),
            toggle_prob: f.sampler.toggle_prob.unwrap_or(d.toggle_prob),
            priors: PriorSpec {
                sd_alpha: f.sampler.sd_alpha.unwrap_or(dp.sd_alpha),
                sd_phi: f.sampler.sd_phi.unwrap_or(dp.sd_phi),
                sd_theta: f.sampler.sd_theta.unwrap_or(dp.sd_theta),
                inc_prob: f.sampler.inc_prob.unwrap_or(dp.inc_prob),
                ..dp
            },
            ..d
        };
        if f.truth.phi.len() > sampler.p_max || f.truth.theta.len() > sampler.q_max {
            return Err(GarmaError::InvalidConfig(format!(
                "true model has order ({}, {}) beyond the sampler maximum ({}, {})",
                f.truth.phi.len(),
                f.truth.theta.len(),
                sampler.p_max,
                sampler.q_max
            )));
        }
        let mut phi = f.truth.phi;
        phi.resize(sampler.p_max, 0.0);
        let mut theta = f.truth.theta;
        theta.resize(sampler.q_max, 0.0);
        let s = Scenario {
            name: f.name.unwrap_or_else(|| "scenario".to_string()),
            family,
            truth: ParamState::from_values(f.truth.alpha, &[], &phi, &theta),
            n: f.n,
            warmup: f.warmup,
            c: f.c,
            replications: f.replications,
            seed: f.seed,
            sampler,
            burn_grid: f.burn_grid,
            thin_grid: f.thin_grid,
            sigma_grid: f.sigma_grid,
            level: f.level,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        Scenario::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GarmaError::InvalidConfig(msg));
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.n == 0 {
            return bad("series length n must be at least 1".into());
        }
        if self.burn_grid.is_empty() || self.thin_grid.is_empty() || self.sigma_grid.is_empty() {
            return bad("burn_grid, thin_grid and sigma_grid must be nonempty".into());
        }
        if let Some(&b) = self.burn_grid.iter().find(|&&b| b >= self.sampler.iters) {
            return bad(format!(
                "burn-in {b} is not below iters = {}",
                self.sampler.iters
            ));
        }
        if self.thin_grid.contains(&0) {
            return bad("thinning lags must be at least 1".into());
        }
        if let Some(s) = self
            .sigma_grid
            .iter()
            .find(|s| !(**s > 0.0 && s.is_finite()))
        {
            return bad(format!("proposal scales must be positive, got {s}"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return bad(format!("level must lie in (0, 1), got {}", self.level));
        }
        if self.truth.n_beta() != 0
            || self.truth.p() != self.sampler.p_max
            || self.truth.q() != self.sampler.q_max
        {
            return Err(GarmaError::Dimension(
                "true parameters must match the sampler's maximum orders".into(),
            ));
        }
        self.truth.validate()?;
        self.sampler.validate(0)
    }

    /// Grid cells in report order: sigma, then burn-in, then thinning lag.
    pub fn cells(&self) -> Vec<(f64, usize, usize)> {
        let mut out = Vec::new();
        for &s in &self.sigma_grid {
            for &b in &self.burn_grid {
                for &t in &self.thin_grid {
                    out.push((s, b, t));
                }
            }
        }
        out
    }
}

/// Replication-averaged summary of one coefficient in one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefAggregate {
    pub name: String,
    pub truth: f64,
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    pub ess: f64,
    pub hpd_lo: f64,
    pub hpd_hi: f64,
    pub q_lo: f64,
    pub q_hi: f64,
    pub incl_freq: f64,
}

impl CoefAggregate {
    fn stats(&self) -> [f64; 9] {
        [
            self.mean,
            self.median,
            self.sd,
            self.ess,
            self.hpd_lo,
            self.hpd_hi,
            self.q_lo,
            self.q_hi,
            self.incl_freq,
        ]
    }

    fn with_stats(name: String, truth: f64, s: [f64; 9]) -> Self {
        CoefAggregate {
            name,
            truth,
            mean: s[0],
            median: s[1],
            sd: s[2],
            ess: s[3],
            hpd_lo: s[4],
            hpd_hi: s[5],
            q_lo: s[6],
            q_hi: s[7],
            incl_freq: s[8],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub sigma: f64,
    pub burn: usize,
    pub thin: usize,
    /// Replications that contributed to this cell.
    pub replications: usize,
    pub pct_correct_hpd: f64,
    pub pct_correct_quantile: f64,
    pub coefs: Vec<CoefAggregate>,
}

impl CellReport {
    pub fn coef(&self, name: &str) -> Option<&CoefAggregate> {
        self.coefs.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub name: String,
    pub requested: usize,
    /// Failed replications as `(index, message)`; they are left out of every
    /// average.
    pub failures: Vec<(usize, String)>,
    pub cells: Vec<CellReport>,
}

impl ScenarioReport {
    pub fn effective_replications(&self) -> usize {
        self.requested - self.failures.len()
    }

    pub fn cell(&self, sigma: f64, burn: usize, thin: usize) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.sigma == sigma && c.burn == burn && c.thin == thin)
    }
}

struct CellOutcome {
    stats: Vec<[f64; 9]>,
    correct_hpd: bool,
    correct_quantile: bool,
}

fn outcome(summary: &PosteriorSummary, truth: &ParamState) -> Result<CellOutcome> {
    let stats = summary
        .coefs
        .iter()
        .map(|c| {
            [
                c.mean,
                c.median,
                c.sd,
                c.ess,
                c.hpd_lo,
                c.hpd_hi,
                c.q_lo,
                c.q_hi,
                c.incl_freq,
            ]
        })
        .collect();
    Ok(CellOutcome {
        stats,
        correct_hpd: classify_model(summary, truth, IntervalKind::Hpd)?,
        correct_quantile: classify_model(summary, truth, IntervalKind::Quantile)?,
    })
}

fn run_replication(s: &Scenario, index: usize) -> Result<(Vec<String>, Vec<CellOutcome>)> {
    let sim_seed = derive_seed(s.seed, index as u64);
    let mut spec = SimSpec::new(s.family, s.truth.clone(), s.n, sim_seed);
    spec.warmup = s.warmup;
    spec.c = s.c;
    let series = simulate_garma(&spec)?;
    let mut names = Vec::new();
    let mut out = Vec::new();
    for (j, &sigma) in s.sigma_grid.iter().enumerate() {
        let config = SamplerConfig {
            rj_scale: sigma,
            seed: derive_seed(sim_seed, j as u64 + 1),
            ..s.sampler.clone()
        };
        let chain = run_chain(&series, &s.family, &config)?;
        names.clone_from(&chain.names);
        for &b in &s.burn_grid {
            let burned = burn(&chain, b)?;
            for &t in &s.thin_grid {
                let summary = summarize(&thin(&burned, t)?, s.level)?;
                out.push(outcome(&summary, &s.truth)?);
            }
        }
    }
    Ok((names, out))
}

/// Runs every replication on a pool of `parallelism` worker threads and
/// averages the per-cell results in replication order.
pub fn run_scenario(s: &Scenario, parallelism: usize) -> Result<ScenarioReport> {
    s.validate()?;
    if parallelism == 0 {
        return Err(GarmaError::InvalidConfig(
            "parallelism must be at least 1".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| GarmaError::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<(Vec<String>, Vec<CellOutcome>)>> = pool.install(|| {
        (0..s.replications)
            .into_par_iter()
            .map(|i| run_replication(s, i))
            .collect()
    });

    let names: Vec<String> = {
        let cfg = &s.sampler;
        ParamState::empty(0, cfg.p_max, cfg.q_max)
            .coefs()
            .map(|c| ParamState::coef_name(c, &[]))
            .collect()
    };
    let grid = s.cells();
    let mut sums = vec![vec![[0.0f64; 9]; names.len()]; grid.len()];
    let mut hits = vec![(0usize, 0usize); grid.len()];
    let mut failures = Vec::new();
    let mut ok = 0usize;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok((_, cells)) => {
                ok += 1;
                for (k, cell) in cells.iter().enumerate() {
                    for (acc, st) in sums[k].iter_mut().zip(&cell.stats) {
                        for (a, v) in acc.iter_mut().zip(st) {
                            *a += v;
                        }
                    }
                    hits[k].0 += cell.correct_hpd as usize;
                    hits[k].1 += cell.correct_quantile as usize;
                }
            }
            Err(e) => failures.push((i, e.to_string())),
        }
    }

    let okf = ok as f64;
    let cells = grid
        .iter()
        .enumerate()
        .map(|(k, &(sigma, burn, thin))| CellReport {
            sigma,
            burn,
            thin,
            replications: ok,
            pct_correct_hpd: 100.0 * hits[k].0 as f64 / okf,
            pct_correct_quantile: 100.0 * hits[k].1 as f64 / okf,
            coefs: names
                .iter()
                .enumerate()
                .map(|(j, name)| {
                    let coef = s
                        .truth
                        .coefs()
                        .nth(j)
                        .expect("truth covers every coefficient");
                    CoefAggregate::with_stats(
                        name.clone(),
                        s.truth.value(coef),
                        sums[k][j].map(|v| v / okf),
                    )
                })
                .collect(),
        })
        .collect();
    Ok(ScenarioReport {
        name: s.name.clone(),
        requested: s.replications,
        failures,
        cells,
    })
}

/// Per-cell differences `a - b`. Cells are matched by position; grid keys and
/// replication counts are taken from `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportDelta {
    pub cells: Vec<CellReport>,
}

pub fn compare_reports(a: &ScenarioReport, b: &ScenarioReport) -> Result<ReportDelta> {
    if a.cells.len() != b.cells.len() {
        return Err(GarmaError::Dimension(format!(
            "reports have {} and {} cells",
            a.cells.len(),
            b.cells.len()
        )));
    }
    let mut cells = Vec::with_capacity(a.cells.len());
    for (ca, cb) in a.cells.iter().zip(&b.cells) {
        let same_coefs = ca.coefs.len() == cb.coefs.len()
            && ca
                .coefs
                .iter()
                .zip(&cb.coefs)
                .all(|(x, y)| x.name == y.name);
        if !same_coefs {
            return Err(GarmaError::Dimension(
                "reports summarize different coefficients".into(),
            ));
        }
        let coefs = ca
            .coefs
            .iter()
            .zip(&cb.coefs)
            .map(|(x, y)| {
                let (sx, sy) = (x.stats(), y.stats());
                CoefAggregate::with_stats(
                    x.name.clone(),
                    x.truth - y.truth,
                    std::array::from_fn(|i| sx[i] - sy[i]),
                )
            })
            .collect();
        cells.push(CellReport {
            pct_correct_hpd: ca.pct_correct_hpd - cb.pct_correct_hpd,
            pct_correct_quantile: ca.pct_correct_quantile - cb.pct_correct_quantile,
            coefs,
            ..ca.clone()
        });
    }
    Ok(ReportDelta { cells })
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else {
        v.to_string()
    }
}

fn num1(v: f64) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else {
        format!("{v:.1}")
    }
}

/// One row per cell and coefficient.
pub fn write_cells_csv<W: Write>(cells: &[CellReport], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "sigma",
        "burn",
        "thin",
        "coef",
        "truth",
        "mean",
        "median",
        "sd",
        "hpd_lo",
        "hpd_hi",
        "q_lo",
        "q_hi",
        "ess",
        "incl_freq",
        "pct_correct_hpd",
        "pct_correct_quantile",
        "replications",
    ])?;
    for cell in cells {
        for c in &cell.coefs {
            out.write_record([
                num(cell.sigma),
                cell.burn.to_string(),
                cell.thin.to_string(),
                c.name.clone(),
                num(c.truth),
                num(c.mean),
                num(c.median),
                num(c.sd),
                num(c.hpd_lo),
                num(c.hpd_hi),
                num(c.q_lo),
                num(c.q_hi),
                num1(c.ess),
                num(c.incl_freq),
                num(cell.pct_correct_hpd),
                num(cell.pct_correct_quantile),
                cell.replications.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_report_csv<W: Write>(report: &ScenarioReport, w: W) -> Result<()> {
    write_cells_csv(&report.cells, w)
}

/// Plain-text tables, one block per cell.
pub fn format_report(report: &ScenarioReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{}: {} of {} replications succeeded",
        report.name,
        report.effective_replications(),
        report.requested
    );
    for (i, msg) in &report.failures {
        let _ = writeln!(s, "  replication {i} failed: {msg}");
    }
    for cell in &report.cells {
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "sigma = {}, burn-in = {}, thin = {}",
            cell.sigma, cell.burn, cell.thin
        );
        let _ = writeln!(
            s,
            "{:<8} {:>7} {:>7} {:>7} {:>6} {:>18} {:>18} {:>8}",
            "coef", "true", "Mean", "Median", "sd", "HPD", "Quant", "ESS"
        );
        for c in &cell.coefs {
            let _ = writeln!(
                s,
                "{:<8} {:>7.3} {:>7.3} {:>7.3} {:>6.3} {:>18} {:>18} {:>8}",
                c.name,
                c.truth,
                c.mean,
                c.median,
                c.sd,
                format!("({:.3}, {:.3})", c.hpd_lo, c.hpd_hi),
                format!("({:.3}, {:.3})", c.q_lo, c.q_hi),
                num1(c.ess)
            );
        }
        let _ = writeln!(
            s,
            "%cob: HPD {:.1}%  Quant {:.1}%",
            cell.pct_correct_hpd, cell.pct_correct_quantile
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        name = "tiny"
        family = "poisson"
        n = 30
        replications = 2
        seed = 9
        burn_grid = [0, 5]
        thin_grid = [1, 2]
        sigma_grid = [0.5, 5.0, 8.0]

        [truth]
        alpha = 0.5
        phi = [0.3]

        [sampler]
        p_max = 2
        q_max = 1
        iters = 10
    "#;

    #[test]
    fn parses_and_pads_truth() {
        let s = Scenario::from_toml(MINIMAL).unwrap();
        assert_eq!(s.truth.phi, vec![0.3, 0.0]);
        assert_eq!(s.truth.theta, vec![0.0]);
        assert_eq!(s.cells().len(), 12);
        assert_eq!(s.level, 0.95);
        assert_eq!(s.sampler.priors.sd_alpha, 0.3);
    }

    #[test]
    fn rejects_bad_scenarios() {
        for (from, to) in [
            ("replications = 2", "replications = 0"),
            ("burn_grid = [0, 5]", "burn_grid = [0, 10]"),
            ("thin_grid = [1, 2]", "thin_grid = []"),
            ("sigma_grid = [0.5, 5.0, 8.0]", "sigma_grid = [0.0]"),
            ("phi = [0.3]", "phi = [0.3, 0.1, 0.2]"),
            ("family = \"poisson\"", "family = \"binomial\""),
            ("seed = 9", "sede = 9"),
        ] {
            let text = MINIMAL.replace(from, to);
            assert!(Scenario::from_toml(&text).is_err(), "{to}");
        }
    }

    #[test]
    fn report_shape() {
        let mut s = Scenario::from_toml(MINIMAL).unwrap();
        s.replications = 1;
        let r = run_scenario(&s, 1).unwrap();
        assert_eq!(r.cells.len(), 3 * 2 * 2);
        for c in &r.cells {
            assert_eq!(c.replications, 1);
            assert_eq!(c.coefs.len(), 4);
            assert!((0.0..=100.0).contains(&c.pct_correct_hpd));
        }
        let mut buf = Vec::new();
        write_report_csv(&r, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 12 * 4);
        assert!(format_report(&r).contains("sigma = 8, burn-in = 5, thin = 2"));
    }

    #[test]
    fn failed_replications_are_counted() {
        let mut s = Scenario::from_toml(MINIMAL).unwrap();
        s.truth.alpha = 3.0;
        s.truth.phi[0] = 5.0;
        let r = run_scenario(&s, 1).unwrap();
        assert_eq!(r.failures.len(), 2);
        assert_eq!(r.effective_replications(), 0);
    }

    fn one_cell(pct: f64) -> ScenarioReport {
        ScenarioReport {
            name: "x".into(),
            requested: 1,
            failures: Vec::new(),
            cells: vec![CellReport {
                sigma: 5.0,
                burn: 0,
                thin: 1,
                replications: 1,
                pct_correct_hpd: pct,
                pct_correct_quantile: pct,
                coefs: vec![CoefAggregate::with_stats("alpha".into(), -1.0, [0.5; 9])],
            }],
        }
    }

    #[test]
    fn compare_examples() {
        let d = compare_reports(&one_cell(90.0), &one_cell(80.0)).unwrap();
        assert_eq!(d.cells[0].pct_correct_hpd, 10.0);
        let same = compare_reports(&one_cell(90.0), &one_cell(90.0)).unwrap();
        assert!(same.cells[0].coefs[0].stats().iter().all(|&v| v == 0.0));
        assert_eq!(same.cells[0].pct_correct_quantile, 0.0);
        let mut two = one_cell(90.0);
        two.cells.push(two.cells[0].clone());
        assert!(compare_reports(&one_cell(90.0), &two).is_err());
    }
}
