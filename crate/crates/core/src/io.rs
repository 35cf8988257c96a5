//! File formats: series CSV, chain CSV and its TOML metadata sidecar.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading a
//! file back reproduces the in-memory values exactly.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::diagnostics::PosteriorSummary;
use crate::error::{GarmaError, Result};
use crate::model::{Coef, CountSeries};
use crate::sampler::{ChainMeta, ChainOutput, SamplerConfig};

/// Writes `t,y,<covariates...>` with 1-based `t`.
pub fn write_series_csv<W: Write>(series: &CountSeries, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string(), "y".to_string()];
    header.extend(series.covariate_names().iter().cloned());
    out.write_record(&header)?;
    for (t, &y) in series.counts().iter().enumerate() {
        let mut rec = vec![(t + 1).to_string(), y.to_string()];
        rec.extend(series.covariates(t).iter().map(|v| v.to_string()));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Options applied while loading a data file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataOptions {
    pub c: f64,
    /// Append a `trend` column holding the 1-based row index.
    pub trend: bool,
    /// Append a `logtrend` column holding its logarithm.
    pub logtrend: bool,
}

impl Default for DataOptions {
    fn default() -> Self {
        DataOptions {
            c: 0.3,
            trend: false,
            logtrend: false,
        }
    }
}

/// Reads a data file: a required `y` column of nonnegative integers, an
/// ignored `t` column, and any other columns as real covariates.
pub fn read_series_csv<R: Read>(r: R, opts: &DataOptions) -> Result<CountSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(r);
    let header = rdr.headers()?.clone();
    let y_col = header
        .iter()
        .position(|h| h == "y")
        .ok_or_else(|| GarmaError::InvalidSeries("data file has no 'y' column".into()))?;
    let cov_cols: Vec<usize> = (0..header.len())
        .filter(|&i| i != y_col && &header[i] != "t")
        .collect();
    let mut names: Vec<String> = cov_cols.iter().map(|&i| header[i].to_string()).collect();
    for (flag, name) in [(opts.trend, "trend"), (opts.logtrend, "logtrend")] {
        if flag {
            if names.iter().any(|n| n == name) {
                return Err(GarmaError::InvalidSeries(format!(
                    "data file already has a '{name}' column"
                )));
            }
            names.push(name.to_string());
        }
    }

    let mut y = Vec::new();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |col: usize| -> Result<&str> {
            match rec.get(col) {
                Some(s) if !s.is_empty() => Ok(s),
                _ => Err(GarmaError::InvalidSeries(format!(
                    "missing value in column '{}' on line {line}",
                    &header[col]
                ))),
            }
        };
        let ys = field(y_col)?;
        let yv: u64 = ys.parse().map_err(|_| {
            GarmaError::InvalidSeries(format!(
                "y = '{ys}' on line {line} is not a nonnegative integer"
            ))
        })?;
        y.push(yv);
        let mut row = Vec::with_capacity(names.len());
        for &col in &cov_cols {
            let s = field(col)?;
            let v: f64 = s.parse().map_err(|_| {
                GarmaError::InvalidSeries(format!(
                    "'{s}' in column '{}' on line {line} is not a number",
                    &header[col]
                ))
            })?;
            row.push(v);
        }
        let t = (i + 1) as f64;
        if opts.trend {
            row.push(t);
        }
        if opts.logtrend {
            row.push(t.ln());
        }
        rows.push(row);
    }
    if y.is_empty() {
        return Err(GarmaError::InvalidSeries(
            "data file has no observations".into(),
        ));
    }
    CountSeries::with_covariates(y, rows, names, opts.c)
}

/// Sidecar stored next to a chain CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSidecar {
    pub meta: ChainMeta,
    pub names: Vec<String>,
    pub accept_rj: Vec<u64>,
    pub proposed_rj: Vec<u64>,
    pub accept_rw: Vec<u64>,
    pub proposed_rw: Vec<u64>,
}

impl ChainSidecar {
    pub fn of(chain: &ChainOutput) -> Self {
        ChainSidecar {
            meta: chain.meta.clone(),
            names: chain.names.clone(),
            accept_rj: chain.accept_rj.clone(),
            proposed_rj: chain.proposed_rj.clone(),
            accept_rw: chain.accept_rw.clone(),
            proposed_rw: chain.proposed_rw.clone(),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| GarmaError::Parse(e.to_string()))
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| GarmaError::Parse(e.to_string()))
    }
}

/// Writes `iter,<coef names>,ind_<toggleable names>`. `iter` is the 1-based
/// iteration number in the original chain.
pub fn write_chain_csv<W: Write>(chain: &ChainOutput, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["iter".to_string()];
    header.extend(chain.names.iter().cloned());
    header.extend(
        chain
            .toggleable
            .iter()
            .map(|&j| format!("ind_{}", chain.names[j])),
    );
    out.write_record(&header)?;
    let thin = chain.meta.thin.max(1);
    for i in 0..chain.rows() {
        let mut rec = Vec::with_capacity(header.len());
        rec.push((chain.meta.burned + i * thin + 1).to_string());
        rec.extend(chain.row(i).iter().map(|v| v.to_string()));
        rec.extend(
            chain
                .indicator_row(i)
                .iter()
                .map(|&b| if b { "1" } else { "0" }.to_string()),
        );
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

fn coef_from_column(name: &str, n_beta: &mut usize) -> Result<Coef> {
    if name.starts_with("beta_") {
        *n_beta += 1;
        return Ok(Coef::Beta(*n_beta - 1));
    }
    let c = crate::sampler::parse_coef_name(name, &[])?;
    if let Coef::Beta(_) = c {
        *n_beta += 1;
    }
    Ok(c)
}

/// Reads a chain CSV. Acceptance counters and provenance come from the
/// sidecar when given; otherwise counters are zero and the metadata is
/// reconstructed from the column layout.
pub fn read_chain_csv<R: Read>(r: R, sidecar: Option<&ChainSidecar>) -> Result<ChainOutput> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(r);
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("iter") {
        return Err(GarmaError::Parse(
            "chain file must start with an 'iter' column".into(),
        ));
    }
    let mut names = Vec::new();
    let mut ind_names = Vec::new();
    for h in header.iter().skip(1) {
        match h.strip_prefix("ind_") {
            Some(n) => ind_names.push(n.to_string()),
            None => {
                if !ind_names.is_empty() {
                    return Err(GarmaError::Parse(format!(
                        "coefficient column '{h}' after indicator columns"
                    )));
                }
                names.push(h.to_string());
            }
        }
    }
    let mut n_beta = 0;
    let coefs = names
        .iter()
        .map(|n| coef_from_column(n, &mut n_beta))
        .collect::<Result<Vec<Coef>>>()?;
    let toggleable = ind_names
        .iter()
        .map(|n| {
            names.iter().position(|m| m == n).ok_or_else(|| {
                GarmaError::Parse(format!(
                    "indicator column 'ind_{n}' has no coefficient column"
                ))
            })
        })
        .collect::<Result<Vec<usize>>>()?;

    let d = names.len();
    let k = toggleable.len();
    let mut draws = Vec::new();
    let mut indicators = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != 1 + d + k {
            return Err(GarmaError::Parse(format!(
                "line {line} has {} fields, expected {}",
                rec.len(),
                1 + d + k
            )));
        }
        for s in rec.iter().skip(1).take(d) {
            let v: f64 = s
                .parse()
                .map_err(|_| GarmaError::Parse(format!("'{s}' on line {line} is not a number")))?;
            draws.push(v);
        }
        for s in rec.iter().skip(1 + d) {
            indicators.push(match s {
                "1" => true,
                "0" => false,
                _ => {
                    return Err(GarmaError::Parse(format!(
                        "indicator '{s}' on line {line} is not 0 or 1"
                    )))
                }
            });
        }
    }

    let (meta, counters) = match sidecar {
        Some(sc) => {
            if sc.names != names {
                return Err(GarmaError::Dimension(
                    "sidecar coefficient names do not match the chain columns".into(),
                ));
            }
            (
                sc.meta.clone(),
                [
                    sc.accept_rj.clone(),
                    sc.proposed_rj.clone(),
                    sc.accept_rw.clone(),
                    sc.proposed_rw.clone(),
                ],
            )
        }
        None => {
            let p = coefs.iter().filter(|c| matches!(c, Coef::Phi(_))).count();
            let q = coefs.iter().filter(|c| matches!(c, Coef::Theta(_))).count();
            let always_included = (0..d)
                .filter(|j| !toggleable.contains(j))
                .map(|j| coefs[j])
                .collect();
            let rows = draws.len().checked_div(d).unwrap_or(0);
            let meta = ChainMeta {
                config: SamplerConfig {
                    p_max: p,
                    q_max: q,
                    iters: rows,
                    always_included,
                    ..SamplerConfig::default()
                },
                family: String::new(),
                n_obs: 0,
                burned: 0,
                thin: 1,
            };
            (meta, std::array::from_fn(|_| vec![0; d]))
        }
    };
    let [accept_rj, proposed_rj, accept_rw, proposed_rw] = counters;
    Ok(ChainOutput {
        coefs,
        names,
        toggleable,
        draws,
        indicators,
        accept_rj,
        proposed_rj,
        accept_rw,
        proposed_rw,
        meta,
    })
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else {
        v.to_string()
    }
}

/// `name,mean,median,sd,hpd_lo,hpd_hi,q_lo,q_hi,ess,geweke_z,incl_freq`, one
/// row per coefficient. Undefined values are written as `NA`.
pub fn write_summary_csv<W: Write>(summary: &PosteriorSummary, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "name",
        "mean",
        "median",
        "sd",
        "hpd_lo",
        "hpd_hi",
        "q_lo",
        "q_hi",
        "ess",
        "geweke_z",
        "incl_freq",
    ])?;
    for c in &summary.coefs {
        out.write_record([
            c.name.clone(),
            num(c.mean),
            num(c.median),
            num(c.sd),
            num(c.hpd_lo),
            num(c.hpd_hi),
            num(c.q_lo),
            num(c.q_hi),
            if c.ess.is_nan() {
                "NA".to_string()
            } else {
                format!("{:.1}", c.ess)
            },
            c.geweke_z.map_or("NA".to_string(), |z| z.to_string()),
            num(c.incl_freq),
        ])?;
    }
    out.flush()?;
    Ok(())
}
