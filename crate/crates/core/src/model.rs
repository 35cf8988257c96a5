//! Count-valued GARMA models: families, the clipped log-link recursion and
//! exact conditional log-likelihoods.
//!
//! The linear predictor for `t = 1..n` is
//!
//! ```text
//! eta_t = alpha + x_t'beta
//!       + sum_j phi_j   * (log Y*_{t-j} - x_{t-j}'beta)
//!       + sum_j theta_j * r_{t-j}
//! ```
//!
//! with `Y*_t = max(Y_t, c)` and working residuals `r_t = log Y*_t - log mu_t`.
//! Lagged terms whose time index falls before the first observation
//! contribute zero.

use std::fmt;

use crate::error::{GarmaError, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Observed counts with their exogenous covariates and the clipping constant.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSeries {
    y: Vec<u64>,
    /// Row-major `n x r` covariate matrix.
    x: Vec<f64>,
    r: usize,
    c: f64,
    covariate_names: Vec<String>,
}

impl CountSeries {
    /// Series without covariates.
    pub fn new(y: Vec<u64>, c: f64) -> Result<Self> {
        Self::with_covariates(y, Vec::new(), Vec::new(), c)
    }

    /// `rows[t]` holds the covariates of observation `t`; every row must have
    /// one entry per name in `covariate_names`.
    pub fn with_covariates(
        y: Vec<u64>,
        rows: Vec<Vec<f64>>,
        covariate_names: Vec<String>,
        c: f64,
    ) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(GarmaError::InvalidSeries(format!(
                "clipping constant must lie in (0, 1), got {c}"
            )));
        }
        let r = covariate_names.len();
        if r > 0 && rows.len() != y.len() {
            return Err(GarmaError::InvalidSeries(format!(
                "covariate matrix has {} rows but there are {} observations",
                rows.len(),
                y.len()
            )));
        }
        let mut x = Vec::with_capacity(y.len() * r);
        if r > 0 {
            for (t, row) in rows.iter().enumerate() {
                if row.len() != r {
                    return Err(GarmaError::InvalidSeries(format!(
                        "covariate row {} has {} entries, expected {r}",
                        t + 1,
                        row.len()
                    )));
                }
                if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                    return Err(GarmaError::InvalidSeries(format!(
                        "covariate row {} contains non-finite value {v}",
                        t + 1
                    )));
                }
                x.extend_from_slice(row);
            }
        }
        Ok(CountSeries {
            y,
            x,
            r,
            c,
            covariate_names,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn counts(&self) -> &[u64] {
        &self.y
    }

    pub fn n_covariates(&self) -> usize {
        self.r
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn clip_constant(&self) -> f64 {
        self.c
    }

    /// Covariates of observation `t` (0-based).
    pub fn covariates(&self, t: usize) -> &[f64] {
        &self.x[t * self.r..(t + 1) * self.r]
    }

    /// `log(max(y_t, c))` for every observation.
    pub fn log_clipped(&self) -> Vec<f64> {
        self.y.iter().map(|&y| clip(y, self.c).ln()).collect()
    }
}

/// Conditional distribution of `Y_t` given the past.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Poisson,
    /// Binomial with a known number of trials.
    Binomial {
        m: u64,
    },
    /// Negative binomial with a known size parameter.
    NegBinomial {
        k: f64,
    },
}

impl Family {
    pub fn binomial(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(GarmaError::InvalidFamily(
                "binomial trials m must be at least 1".into(),
            ));
        }
        Ok(Family::Binomial { m })
    }

    pub fn neg_binomial(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(GarmaError::InvalidFamily(format!(
                "negative binomial size k must be positive and finite, got {k}"
            )));
        }
        Ok(Family::NegBinomial { k })
    }

    /// Builds a family from its name and the one hyperparameter it takes.
    /// Supplying `m` to a non-binomial family or `k` to a non-negative-binomial
    /// one is an error.
    pub fn from_parts(name: &str, m: Option<u64>, k: Option<f64>) -> Result<Self> {
        let fam = match name.to_ascii_lowercase().as_str() {
            "poisson" => Family::Poisson,
            "binomial" => Family::binomial(m.ok_or_else(|| {
                GarmaError::InvalidFamily("binomial family needs the number of trials m".into())
            })?)?,
            "negbinomial" | "negative-binomial" | "nb" => {
                Family::neg_binomial(k.ok_or_else(|| {
                    GarmaError::InvalidFamily("negative binomial family needs the size k".into())
                })?)?
            }
            other => {
                return Err(GarmaError::InvalidFamily(format!(
                    "unknown family '{other}' (expected poisson, binomial or negbinomial)"
                )))
            }
        };
        if m.is_some() && !matches!(fam, Family::Binomial { .. }) {
            return Err(GarmaError::InvalidFamily(format!(
                "m only applies to the binomial family, not {}",
                fam.name()
            )));
        }
        if k.is_some() && !matches!(fam, Family::NegBinomial { .. }) {
            return Err(GarmaError::InvalidFamily(format!(
                "k only applies to the negative binomial family, not {}",
                fam.name()
            )));
        }
        Ok(fam)
    }

    /// `(m, k)` as accepted by [`Family::from_parts`].
    pub fn parts(&self) -> (Option<u64>, Option<f64>) {
        match *self {
            Family::Poisson => (None, None),
            Family::Binomial { m } => (Some(m), None),
            Family::NegBinomial { k } => (None, Some(k)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Poisson => "poisson",
            Family::Binomial { .. } => "binomial",
            Family::NegBinomial { .. } => "negbinomial",
        }
    }

    /// Checks the family's own parameter and that the counts lie in its support.
    pub fn validate(&self, series: &CountSeries) -> Result<()> {
        match *self {
            Family::Poisson => Ok(()),
            Family::Binomial { m } => {
                Family::binomial(m)?;
                match series.counts().iter().position(|&y| y > m) {
                    Some(t) => Err(GarmaError::InvalidSeries(format!(
                        "observation {} = {} exceeds binomial trials m = {m}",
                        t + 1,
                        series.counts()[t]
                    ))),
                    None => Ok(()),
                }
            }
            Family::NegBinomial { k } => Family::neg_binomial(k).map(|_| ()),
        }
    }

    /// `(log mu, mu)` for a given linear predictor.
    pub fn inverse_link(&self, eta: f64) -> (f64, f64) {
        match *self {
            Family::Poisson | Family::NegBinomial { .. } => (eta, eta.exp().max(f64::MIN_POSITIVE)),
            Family::Binomial { m } => {
                let m = m as f64;
                let log_mu = m.ln() - softplus(-eta);
                let mu = (m / (1.0 + (-eta).exp()))
                    .min(m.next_down())
                    .max(f64::MIN_POSITIVE);
                (log_mu, mu)
            }
        }
    }

    /// The normalizing part of `log f(y)` that does not depend on the mean.
    fn log_base_measure(&self, y: u64) -> f64 {
        let yf = y as f64;
        match *self {
            Family::Poisson => -libm::lgamma(yf + 1.0),
            Family::Binomial { m } => {
                let m = m as f64;
                libm::lgamma(m + 1.0) - libm::lgamma(yf + 1.0) - libm::lgamma(m - yf + 1.0)
            }
            Family::NegBinomial { k } => {
                libm::lgamma(k + yf) - libm::lgamma(yf + 1.0) - libm::lgamma(k)
            }
        }
    }

    /// Mean-dependent part of `log f(y)` written in terms of the linear
    /// predictor so that no intermediate mean can round to a boundary.
    #[inline]
    fn log_kernel(&self, y: f64, eta: f64, log_mu: f64) -> f64 {
        match *self {
            Family::Poisson => {
                let mu = eta.exp();
                if y == 0.0 {
                    -mu
                } else {
                    y * eta - mu
                }
            }
            Family::Binomial { m } => {
                // softplus(eta) = eta + log m - log mu
                let m = m as f64;
                let sp = eta + m.ln() - log_mu;
                if y == 0.0 {
                    -m * sp
                } else {
                    y * eta - m * sp
                }
            }
            Family::NegBinomial { k } => {
                let log_mu_k = log_add_exp(eta, k.ln());
                let tail = k * (k.ln() - log_mu_k);
                if y == 0.0 {
                    tail
                } else {
                    tail + y * (eta - log_mu_k)
                }
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Poisson => write!(f, "poisson"),
            Family::Binomial { m } => write!(f, "binomial(m={m})"),
            Family::NegBinomial { k } => write!(f, "negbinomial(k={k})"),
        }
    }
}

#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[inline]
fn log_add_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    hi + (-(a - b).abs()).exp().ln_1p()
}

/// Identifies one coefficient of the linear predictor. Indices are 0-based;
/// `Phi(0)` is the lag-one AR coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coef {
    Alpha,
    Beta(usize),
    Phi(usize),
    Theta(usize),
}

/// The full coefficient vector of the largest model plus inclusion flags.
/// Excluded coefficients hold exactly zero. The intercept is always included.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamState {
    pub alpha: f64,
    pub beta: Vec<f64>,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub inc_beta: Vec<bool>,
    pub inc_phi: Vec<bool>,
    pub inc_theta: Vec<bool>,
}

impl ParamState {
    /// All coefficients zero and excluded.
    pub fn empty(r: usize, p: usize, q: usize) -> Self {
        ParamState {
            alpha: 0.0,
            beta: vec![0.0; r],
            phi: vec![0.0; p],
            theta: vec![0.0; q],
            inc_beta: vec![false; r],
            inc_phi: vec![false; p],
            inc_theta: vec![false; q],
        }
    }

    /// A state whose included set is exactly the non-zero entries given.
    pub fn from_values(alpha: f64, beta: &[f64], phi: &[f64], theta: &[f64]) -> Self {
        ParamState {
            alpha,
            beta: beta.to_vec(),
            phi: phi.to_vec(),
            theta: theta.to_vec(),
            inc_beta: beta.iter().map(|&v| v != 0.0).collect(),
            inc_phi: phi.iter().map(|&v| v != 0.0).collect(),
            inc_theta: theta.iter().map(|&v| v != 0.0).collect(),
        }
    }

    pub fn n_beta(&self) -> usize {
        self.beta.len()
    }

    pub fn p(&self) -> usize {
        self.phi.len()
    }

    pub fn q(&self) -> usize {
        self.theta.len()
    }

    /// Number of coefficients, intercept included.
    pub fn dim(&self) -> usize {
        1 + self.beta.len() + self.phi.len() + self.theta.len()
    }

    /// Coefficients in canonical order: intercept, covariates, AR, MA.
    pub fn coefs(&self) -> impl Iterator<Item = Coef> {
        let (r, p, q) = (self.n_beta(), self.p(), self.q());
        std::iter::once(Coef::Alpha)
            .chain((0..r).map(Coef::Beta))
            .chain((0..p).map(Coef::Phi))
            .chain((0..q).map(Coef::Theta))
    }

    /// Position of `coef` in the canonical order.
    pub fn flat_index(&self, coef: Coef) -> usize {
        match coef {
            Coef::Alpha => 0,
            Coef::Beta(j) => 1 + j,
            Coef::Phi(j) => 1 + self.n_beta() + j,
            Coef::Theta(j) => 1 + self.n_beta() + self.p() + j,
        }
    }

    pub fn contains(&self, coef: Coef) -> bool {
        match coef {
            Coef::Alpha => true,
            Coef::Beta(j) => j < self.n_beta(),
            Coef::Phi(j) => j < self.p(),
            Coef::Theta(j) => j < self.q(),
        }
    }

    pub fn value(&self, coef: Coef) -> f64 {
        match coef {
            Coef::Alpha => self.alpha,
            Coef::Beta(j) => self.beta[j],
            Coef::Phi(j) => self.phi[j],
            Coef::Theta(j) => self.theta[j],
        }
    }

    pub fn is_included(&self, coef: Coef) -> bool {
        match coef {
            Coef::Alpha => true,
            Coef::Beta(j) => self.inc_beta[j],
            Coef::Phi(j) => self.inc_phi[j],
            Coef::Theta(j) => self.inc_theta[j],
        }
    }

    /// Sets the value of an included coefficient.
    pub fn set_value(&mut self, coef: Coef, v: f64) {
        debug_assert!(self.is_included(coef));
        match coef {
            Coef::Alpha => self.alpha = v,
            Coef::Beta(j) => self.beta[j] = v,
            Coef::Phi(j) => self.phi[j] = v,
            Coef::Theta(j) => self.theta[j] = v,
        }
    }

    /// Adds `coef` to the model with value `v`.
    pub fn include(&mut self, coef: Coef, v: f64) {
        self.set_flag(coef, true);
        self.set_value(coef, v);
    }

    /// Removes `coef` from the model, zeroing its value.
    pub fn exclude(&mut self, coef: Coef) {
        match coef {
            Coef::Alpha => panic!("the intercept cannot be excluded"),
            Coef::Beta(j) => self.beta[j] = 0.0,
            Coef::Phi(j) => self.phi[j] = 0.0,
            Coef::Theta(j) => self.theta[j] = 0.0,
        }
        self.set_flag(coef, false);
    }

    fn set_flag(&mut self, coef: Coef, on: bool) {
        match coef {
            Coef::Alpha => {}
            Coef::Beta(j) => self.inc_beta[j] = on,
            Coef::Phi(j) => self.inc_phi[j] = on,
            Coef::Theta(j) => self.inc_theta[j] = on,
        }
    }

    /// Values in canonical order.
    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        out.push(self.alpha);
        out.extend_from_slice(&self.beta);
        out.extend_from_slice(&self.phi);
        out.extend_from_slice(&self.theta);
        out
    }

    /// Checks vector lengths and the zero-when-excluded invariant.
    pub fn validate(&self) -> Result<()> {
        let pairs: [(&[f64], &[bool], &str); 3] = [
            (&self.beta, &self.inc_beta, "beta"),
            (&self.phi, &self.inc_phi, "phi"),
            (&self.theta, &self.inc_theta, "theta"),
        ];
        for (vals, flags, name) in pairs {
            if vals.len() != flags.len() {
                return Err(GarmaError::Dimension(format!(
                    "{name} has {} values but {} inclusion flags",
                    vals.len(),
                    flags.len()
                )));
            }
            if let Some(j) = vals.iter().zip(flags).position(|(&v, &f)| !f && v != 0.0) {
                return Err(GarmaError::InvalidConfig(format!(
                    "{name}{} is excluded but holds {}",
                    j + 1,
                    vals[j]
                )));
            }
        }
        Ok(())
    }

    /// Canonical name of a coefficient. Covariate coefficients take the
    /// column name when one is supplied.
    pub fn coef_name(coef: Coef, covariate_names: &[String]) -> String {
        match coef {
            Coef::Alpha => "alpha".to_string(),
            Coef::Beta(j) => match covariate_names.get(j) {
                Some(n) => format!("beta_{n}"),
                None => format!("beta{}", j + 1),
            },
            Coef::Phi(j) => format!("phi{}", j + 1),
            Coef::Theta(j) => format!("theta{}", j + 1),
        }
    }
}

/// Linear predictors, conditional means and working residuals along a series.
#[derive(Debug, Clone, PartialEq)]
pub struct MuPath {
    pub eta: Vec<f64>,
    pub mu: Vec<f64>,
    pub resid: Vec<f64>,
}

/// `max(y, c)`.
pub fn clip(y: u64, c: f64) -> f64 {
    (y as f64).max(c)
}

fn check_dims(params: &ParamState, series: &CountSeries) -> Result<()> {
    if params.n_beta() != series.n_covariates() {
        return Err(GarmaError::Dimension(format!(
            "model has {} covariate coefficients but the series has {} covariates",
            params.n_beta(),
            series.n_covariates()
        )));
    }
    Ok(())
}

/// Runs the recursion, calling `visit(t, eta_t, log_mu_t)` at each step.
/// Returns `Err(t)` at the first non-finite linear predictor.
#[inline]
fn recurse(
    params: &ParamState,
    series: &CountSeries,
    family: &Family,
    log_ystar: &[f64],
    resid: &mut Vec<f64>,
    mut visit: impl FnMut(usize, f64, f64),
) -> std::result::Result<(), usize> {
    let n = series.len();
    let r = series.n_covariates();

    let has_beta = params.beta.iter().any(|&b| b != 0.0);
    let xb: Vec<f64> = if has_beta {
        (0..n)
            .map(|t| {
                series
                    .covariates(t)
                    .iter()
                    .zip(&params.beta)
                    .map(|(x, b)| x * b)
                    .sum()
            })
            .collect()
    } else {
        Vec::new()
    };
    debug_assert!(r == params.n_beta());

    let ar: Vec<(usize, f64)> = params
        .phi
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(j, &v)| (j + 1, v))
        .collect();
    let ma: Vec<(usize, f64)> = params
        .theta
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(j, &v)| (j + 1, v))
        .collect();

    let ln_m = match *family {
        Family::Binomial { m } => Some((m as f64).ln()),
        _ => None,
    };
    resid.clear();
    resid.resize(n, 0.0);
    for t in 0..n {
        let mut eta = params.alpha;
        if has_beta {
            eta += xb[t];
        }
        for &(lag, phi) in &ar {
            if lag <= t {
                let s = t - lag;
                let z = if has_beta {
                    log_ystar[s] - xb[s]
                } else {
                    log_ystar[s]
                };
                eta += phi * z;
            }
        }
        for &(lag, theta) in &ma {
            if lag <= t {
                eta += theta * resid[t - lag];
            }
        }
        if !eta.is_finite() {
            return Err(t);
        }
        let log_mu = match ln_m {
            Some(ln_m) => ln_m - softplus(-eta),
            None => eta,
        };
        resid[t] = log_ystar[t] - log_mu;
        visit(t, eta, log_mu);
    }
    Ok(())
}

/// Computes the linear predictor, mean and residual paths.
pub fn mu_path(params: &ParamState, series: &CountSeries, family: &Family) -> Result<MuPath> {
    check_dims(params, series)?;
    let n = series.len();
    let ly = series.log_clipped();
    let mut resid = Vec::with_capacity(n);
    let mut eta_out = Vec::with_capacity(n);
    let mut mu_out = Vec::with_capacity(n);
    recurse(params, series, family, &ly, &mut resid, |_, eta, _| {
        eta_out.push(eta);
        mu_out.push(family.inverse_link(eta).1);
    })
    .map_err(|t| GarmaError::NonFiniteEta { t: t + 1 })?;
    Ok(MuPath {
        eta: eta_out,
        mu: mu_out,
        resid,
    })
}

/// Exact conditional log-likelihood, normalizing constants included.
///
/// Returns `f64::NEG_INFINITY` when some observation has zero probability
/// under its conditional mean.
pub fn log_likelihood(params: &ParamState, series: &CountSeries, family: &Family) -> Result<f64> {
    check_dims(params, series)?;
    GarmaModel::new(series.clone(), *family)?.try_log_likelihood(params)
}

/// Prior standard deviations and the prior inclusion probability.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PriorSpec {
    pub sd_alpha: f64,
    pub sd_phi: f64,
    pub sd_theta: f64,
    pub sd_beta: f64,
    /// Prior probability that any one toggleable coefficient is in the model.
    pub inc_prob: f64,
}

impl Default for PriorSpec {
    fn default() -> Self {
        PriorSpec {
            sd_alpha: 0.3,
            sd_phi: 0.2,
            sd_theta: 0.2,
            sd_beta: 4.0,
            inc_prob: 0.5,
        }
    }
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, sd) in [
            ("sd_alpha", self.sd_alpha),
            ("sd_phi", self.sd_phi),
            ("sd_theta", self.sd_theta),
            ("sd_beta", self.sd_beta),
        ] {
            if !(sd > 0.0 && sd.is_finite()) {
                return Err(GarmaError::InvalidConfig(format!(
                    "{name} must be positive and finite, got {sd}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.inc_prob) {
            return Err(GarmaError::InvalidConfig(format!(
                "inc_prob must lie in [0, 1], got {}",
                self.inc_prob
            )));
        }
        Ok(())
    }

    pub fn sd(&self, coef: Coef) -> f64 {
        match coef {
            Coef::Alpha => self.sd_alpha,
            Coef::Beta(_) => self.sd_beta,
            Coef::Phi(_) => self.sd_phi,
            Coef::Theta(_) => self.sd_theta,
        }
    }

    /// Prior log-density of one coefficient value.
    pub fn log_density(&self, coef: Coef, v: f64) -> f64 {
        normal_log_density(v, self.sd(coef))
    }
}

/// Log-density of `N(0, sd^2)` at `v`.
pub fn normal_log_density(v: f64, sd: f64) -> f64 {
    let z = v / sd;
    -0.5 * LN_2PI - sd.ln() - 0.5 * z * z
}

/// Sum of independent normal log-densities over the intercept and every
/// included coefficient.
pub fn log_prior(params: &ParamState, priors: &PriorSpec) -> f64 {
    params
        .coefs()
        .filter(|&c| params.is_included(c))
        .map(|c| priors.log_density(c, params.value(c)))
        .sum()
}

/// A series and family bundled with the per-observation constants needed
/// for repeated likelihood evaluation.
#[derive(Debug, Clone)]
pub struct GarmaModel {
    series: CountSeries,
    family: Family,
    log_ystar: Vec<f64>,
    y: Vec<f64>,
    base_measure: f64,
}

impl GarmaModel {
    pub fn new(series: CountSeries, family: Family) -> Result<Self> {
        family.validate(&series)?;
        let log_ystar = series.log_clipped();
        let y = series.counts().iter().map(|&v| v as f64).collect();
        let base_measure = series
            .counts()
            .iter()
            .map(|&v| family.log_base_measure(v))
            .sum();
        Ok(GarmaModel {
            series,
            family,
            log_ystar,
            y,
            base_measure,
        })
    }

    pub fn series(&self) -> &CountSeries {
        &self.series
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Log-likelihood, with recursion overflow reported as an error.
    pub fn try_log_likelihood(&self, params: &ParamState) -> Result<f64> {
        check_dims(params, &self.series)?;
        let mut resid = Vec::new();
        self.accumulate(params, &mut resid)
            .map_err(|t| GarmaError::NonFiniteEta { t: t + 1 })
    }

    /// Log-likelihood with recursion overflow folded into `-inf`.
    pub fn log_likelihood(&self, params: &ParamState) -> f64 {
        let mut resid = Vec::new();
        self.log_likelihood_with(params, &mut resid)
    }

    /// As [`GarmaModel::log_likelihood`], reusing a scratch buffer.
    pub fn log_likelihood_with(&self, params: &ParamState, scratch: &mut Vec<f64>) -> f64 {
        self.accumulate(params, scratch)
            .unwrap_or(f64::NEG_INFINITY)
    }

    fn accumulate(
        &self,
        params: &ParamState,
        scratch: &mut Vec<f64>,
    ) -> std::result::Result<f64, usize> {
        let family = self.family;
        let y = &self.y;
        let mut total = 0.0;
        recurse(
            params,
            &self.series,
            &family,
            &self.log_ystar,
            scratch,
            |t, eta, log_mu| {
                total += family.log_kernel(y[t], eta, log_mu);
            },
        )?;
        let ll = total + self.base_measure;
        Ok(if ll.is_nan() { f64::NEG_INFINITY } else { ll })
    }
}
