//! Synthetic GARMA(p, q) count series.

use rand_distr::{Binomial, Distribution, Gamma, Poisson};

use crate::error::{GarmaError, Result};
use crate::model::{clip, CountSeries, Family, ParamState};
use crate::seed::{rng_from_seed, Rng};

/// Deterministic covariates, evaluated at the 1-based generation index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Covariate {
    /// `t`
    Trend,
    /// `log t`
    LogTrend,
}

impl Covariate {
    pub fn name(&self) -> &'static str {
        match self {
            Covariate::Trend => "trend",
            Covariate::LogTrend => "logtrend",
        }
    }

    pub fn eval(&self, t: usize) -> f64 {
        match self {
            Covariate::Trend => t as f64,
            Covariate::LogTrend => (t as f64).ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub family: Family,
    pub params: ParamState,
    /// Observations returned.
    pub n: usize,
    /// Leading draws generated and discarded.
    pub warmup: usize,
    pub c: f64,
    /// One entry per covariate coefficient in `params.beta`.
    pub covariates: Vec<Covariate>,
    pub seed: u64,
}

impl SimSpec {
    pub fn new(family: Family, params: ParamState, n: usize, seed: u64) -> Self {
        SimSpec {
            family,
            params,
            n,
            warmup: 100,
            c: 0.3,
            covariates: Vec::new(),
            seed,
        }
    }
}

/// Draws one count with the given conditional mean.
fn draw(family: &Family, mu: f64, rng: &mut Rng) -> Option<u64> {
    match *family {
        Family::Poisson => draw_poisson(mu, rng),
        Family::Binomial { m } => {
            let p = (mu / m as f64).clamp(0.0, 1.0);
            Binomial::new(m, p).ok().map(|d| d.sample(rng))
        }
        Family::NegBinomial { k } => {
            // Gamma-Poisson mixture: NB(k, p) with p = k / (mu + k).
            let lambda = Gamma::new(k, mu / k).ok()?.sample(rng);
            draw_poisson(lambda, rng)
        }
    }
}

fn draw_poisson(lambda: f64, rng: &mut Rng) -> Option<u64> {
    if lambda == 0.0 {
        return Some(0);
    }
    let d = Poisson::new(lambda).ok()?;
    let y: f64 = d.sample(rng);
    (y.is_finite() && y >= 0.0).then_some(y as u64)
}

/// Runs the GARMA recursion forward, drawing each observation from its
/// conditional distribution. Identical specs give identical series.
pub fn simulate_garma(spec: &SimSpec) -> Result<CountSeries> {
    if spec.n == 0 {
        return Err(GarmaError::InvalidConfig("n must be at least 1".into()));
    }
    if !(spec.c > 0.0 && spec.c < 1.0) {
        return Err(GarmaError::InvalidConfig(format!(
            "clipping constant must lie in (0, 1), got {}",
            spec.c
        )));
    }
    spec.params.validate()?;
    if spec.params.n_beta() != spec.covariates.len() {
        return Err(GarmaError::Dimension(format!(
            "{} covariate coefficients but {} covariates",
            spec.params.n_beta(),
            spec.covariates.len()
        )));
    }
    match spec.family {
        Family::Binomial { m } => {
            Family::binomial(m)?;
        }
        Family::NegBinomial { k } => {
            Family::neg_binomial(k)?;
        }
        Family::Poisson => {}
    }

    let total = spec.warmup + spec.n;
    let p = &spec.params;
    let mut rng = rng_from_seed(spec.seed);
    let mut y = Vec::with_capacity(total);
    let mut rows = Vec::with_capacity(total);
    let mut xb = Vec::with_capacity(total);
    let mut log_ystar = Vec::with_capacity(total);
    let mut resid = Vec::with_capacity(total);

    for s in 0..total {
        let x: Vec<f64> = spec.covariates.iter().map(|c| c.eval(s + 1)).collect();
        let xbs: f64 = x.iter().zip(&p.beta).map(|(a, b)| a * b).sum();
        let mut eta = p.alpha + xbs;
        for (j, &phi) in p.phi.iter().enumerate() {
            let lag = j + 1;
            if phi != 0.0 && lag <= s {
                eta += phi * (log_ystar[s - lag] - xb[s - lag]);
            }
        }
        for (j, &theta) in p.theta.iter().enumerate() {
            let lag = j + 1;
            if theta != 0.0 && lag <= s {
                eta += theta * resid[s - lag];
            }
        }
        if !eta.is_finite() {
            return Err(GarmaError::Generation { step: s + 1 });
        }
        let (log_mu, mu) = spec.family.inverse_link(eta);
        if !mu.is_finite() || !log_mu.is_finite() {
            return Err(GarmaError::Generation { step: s + 1 });
        }
        let ys = draw(&spec.family, mu, &mut rng).ok_or(GarmaError::Generation { step: s + 1 })?;
        let ly = clip(ys, spec.c).ln();
        y.push(ys);
        rows.push(x);
        xb.push(xbs);
        log_ystar.push(ly);
        resid.push(ly - log_mu);
    }

    let names = spec
        .covariates
        .iter()
        .map(|c| c.name().to_string())
        .collect();
    let kept_y = y.split_off(spec.warmup);
    let kept_rows = if spec.covariates.is_empty() {
        Vec::new()
    } else {
        rows.split_off(spec.warmup)
    };
    CountSeries::with_covariates(kept_y, kept_rows, names, spec.c)
}
