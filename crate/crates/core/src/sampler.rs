//! Reversible-jump MCMC over the sub-models of a GARMA(p_max, q_max) model.
//!
//! Every AR, MA and covariate coefficient not listed as always included
//! carries an inclusion indicator. One iteration is
//!
//! 1. a lazy birth/death sweep: each toggleable coefficient, in random
//!    order, has its inclusion flipped by a reversible-jump proposal with
//!    probability `toggle_prob`;
//! 2. a random-walk Metropolis sweep over the currently included
//!    coefficients, again in random order.
//!
//! A birth draws the new value from `N(0, rj_scale^2)` and is accepted with
//! probability
//!
//! ```text
//! min(1, L(cand)/L(cur) * pi0(v) * w/(1-w) / N(v; 0, rj_scale^2))
//! ```
//!
//! where `w` is the prior inclusion probability; a death uses the reciprocal.
//! All ratios are computed in log space.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{GarmaError, Result};
use crate::model::{
    log_prior, normal_log_density, Coef, CountSeries, Family, GarmaModel, ParamState, PriorSpec,
};
use crate::seed::{rng_from_seed, Rng};

/// Anything that can score a parameter state. `-inf` marks an impossible
/// state; such proposals are rejected, never propagated as errors.
pub trait LogLikelihood {
    fn log_likelihood(&self, params: &ParamState) -> f64;
}

impl LogLikelihood for GarmaModel {
    fn log_likelihood(&self, params: &ParamState) -> f64 {
        GarmaModel::log_likelihood(self, params)
    }
}

impl<L: LogLikelihood + ?Sized> LogLikelihood for &L {
    fn log_likelihood(&self, params: &ParamState) -> f64 {
        (**self).log_likelihood(params)
    }
}

/// Likelihood of an empty series: identically zero, so the chain targets
/// the prior.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlatLikelihood;

impl LogLikelihood for FlatLikelihood {
    fn log_likelihood(&self, _params: &ParamState) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub p_max: usize,
    pub q_max: usize,
    pub priors: PriorSpec,
    /// Standard deviation of the birth proposal.
    pub rj_scale: f64,
    /// Standard deviation of the within-model random walk.
    pub rw_scale: f64,
    pub iters: usize,
    pub seed: u64,
    /// Coefficients exempt from birth/death moves. The intercept is always
    /// included whether listed or not.
    #[serde(with = "coef_names")]
    pub always_included: Vec<Coef>,
    /// Probability that a toggleable coefficient's birth/death move is
    /// attempted during one sweep.
    pub toggle_prob: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            p_max: 3,
            q_max: 3,
            priors: PriorSpec::default(),
            rj_scale: 5.0,
            rw_scale: 0.1,
            iters: 30_000,
            seed: 1,
            always_included: vec![Coef::Alpha],
            toggle_prob: 0.5,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self, n_covariates: usize) -> Result<()> {
        self.priors.validate()?;
        if self.iters == 0 {
            return Err(GarmaError::InvalidConfig("iters must be at least 1".into()));
        }
        if !(self.rj_scale > 0.0 && self.rj_scale.is_finite()) {
            return Err(GarmaError::InvalidConfig(format!(
                "rj_scale must be positive, got {}",
                self.rj_scale
            )));
        }
        if !(self.rw_scale > 0.0 && self.rw_scale.is_finite()) {
            return Err(GarmaError::InvalidConfig(format!(
                "rw_scale must be positive, got {}",
                self.rw_scale
            )));
        }
        if !(0.0..=1.0).contains(&self.toggle_prob) {
            return Err(GarmaError::InvalidConfig(format!(
                "toggle_prob must lie in [0, 1], got {}",
                self.toggle_prob
            )));
        }
        let shape = ParamState::empty(n_covariates, self.p_max, self.q_max);
        if let Some(c) = self.always_included.iter().find(|&&c| !shape.contains(c)) {
            return Err(GarmaError::InvalidConfig(format!(
                "always-included coefficient {c:?} is outside the model"
            )));
        }
        Ok(())
    }

    /// Toggleable coefficients in canonical order.
    pub fn toggleable(&self, n_covariates: usize) -> Vec<Coef> {
        ParamState::empty(n_covariates, self.p_max, self.q_max)
            .coefs()
            .filter(|c| *c != Coef::Alpha && !self.always_included.contains(c))
            .collect()
    }

    /// The starting point: everything zero, only always-included
    /// coefficients in the model.
    pub fn initial_state(&self, n_covariates: usize) -> ParamState {
        let mut s = ParamState::empty(n_covariates, self.p_max, self.q_max);
        for &c in &self.always_included {
            if c != Coef::Alpha {
                s.include(c, 0.0);
            }
        }
        s
    }
}

/// Serializes coefficient lists as canonical names (`phi1`, `beta2`, ...).
mod coef_names {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Coef], s: S) -> std::result::Result<S::Ok, S::Error> {
        let names: Vec<String> = v.iter().map(|&c| ParamState::coef_name(c, &[])).collect();
        names.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Coef>, D::Error> {
        let names = Vec::<String>::deserialize(d)?;
        names
            .iter()
            .map(|n| parse_coef_name(n, &[]).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Parses `alpha`, `phiJ`, `thetaJ`, `betaJ` or `beta_<column>` (1-based J).
pub fn parse_coef_name(name: &str, covariate_names: &[String]) -> Result<Coef> {
    let name = name.trim();
    if name == "alpha" {
        return Ok(Coef::Alpha);
    }
    if let Some(col) = name.strip_prefix("beta_") {
        if let Some(j) = covariate_names.iter().position(|c| c == col) {
            return Ok(Coef::Beta(j));
        }
        return Err(GarmaError::Parse(format!(
            "unknown covariate in coefficient name '{name}'"
        )));
    }
    let indexed = [
        ("theta", Coef::Theta as fn(usize) -> Coef),
        ("phi", Coef::Phi),
        ("beta", Coef::Beta),
    ];
    for (prefix, make) in indexed {
        if let Some(rest) = name.strip_prefix(prefix) {
            let j: usize = rest
                .parse()
                .map_err(|_| GarmaError::Parse(format!("bad coefficient name '{name}'")))?;
            if j == 0 {
                return Err(GarmaError::Parse(format!(
                    "coefficient indices start at 1: '{name}'"
                )));
            }
            return Ok(make(j - 1));
        }
    }
    Err(GarmaError::Parse(format!("bad coefficient name '{name}'")))
}

/// The current point of a chain with its cached log-likelihood and log-prior.
pub struct ChainState<'a, L: LogLikelihood> {
    lik: &'a L,
    priors: &'a PriorSpec,
    rj_scale: f64,
    rw_scale: f64,
    params: ParamState,
    log_lik: f64,
    log_prior: f64,
}

impl<'a, L: LogLikelihood> ChainState<'a, L> {
    pub fn new(lik: &'a L, config: &'a SamplerConfig, params: ParamState) -> Self {
        let log_lik = lik.log_likelihood(&params);
        let log_prior = log_prior(&params, &config.priors);
        ChainState {
            lik,
            priors: &config.priors,
            rj_scale: config.rj_scale,
            rw_scale: config.rw_scale,
            params,
            log_lik,
            log_prior,
        }
    }

    pub fn params(&self) -> &ParamState {
        &self.params
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_lik
    }

    /// Birth/death move on `coef`. Returns whether the proposal was accepted.
    pub fn rj_toggle_step(&mut self, coef: Coef, rng: &mut Rng) -> bool {
        debug_assert!(coef != Coef::Alpha);
        let w = self.priors.inc_prob;
        let prior_odds = w.ln() - (1.0 - w).ln();
        let mut cand = self.params.clone();
        let (v, birth) = if self.params.is_included(coef) {
            let v = self.params.value(coef);
            cand.exclude(coef);
            (v, false)
        } else {
            let z: f64 = rng.sample(StandardNormal);
            let v = self.rj_scale * z;
            cand.include(coef, v);
            (v, true)
        };
        let jump =
            self.priors.log_density(coef, v) + prior_odds - normal_log_density(v, self.rj_scale);
        let cand_ll = self.lik.log_likelihood(&cand);
        let log_ratio = (cand_ll - self.log_lik) + if birth { jump } else { -jump };
        let u: f64 = rng.random();
        if u.ln() < log_ratio {
            let dp = self.priors.log_density(coef, v);
            self.log_prior += if birth { dp } else { -dp };
            self.params = cand;
            self.log_lik = cand_ll;
            true
        } else {
            false
        }
    }

    /// Symmetric random-walk update of an included coefficient.
    pub fn rw_update_step(&mut self, coef: Coef, rng: &mut Rng) -> bool {
        debug_assert!(self.params.is_included(coef));
        let old = self.params.value(coef);
        let z: f64 = rng.sample(StandardNormal);
        let new = old + self.rw_scale * z;
        let mut cand = self.params.clone();
        cand.set_value(coef, new);
        let cand_ll = self.lik.log_likelihood(&cand);
        let d_prior = self.priors.log_density(coef, new) - self.priors.log_density(coef, old);
        let log_ratio = (cand_ll - self.log_lik) + d_prior;
        let u: f64 = rng.random();
        if u.ln() < log_ratio {
            self.params = cand;
            self.log_lik = cand_ll;
            self.log_prior += d_prior;
            true
        } else {
            false
        }
    }
}

/// Provenance of a chain: the sampler settings plus any post-processing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainMeta {
    pub config: SamplerConfig,
    pub family: String,
    pub n_obs: usize,
    /// Rows dropped from the front of the chain.
    pub burned: usize,
    /// Thinning lag applied after burning (1 = none).
    pub thin: usize,
}

/// Recorded draws of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    /// Coefficients in canonical order.
    pub coefs: Vec<Coef>,
    pub names: Vec<String>,
    /// Positions in `coefs` of the toggleable coefficients.
    pub toggleable: Vec<usize>,
    /// Row-major `rows x coefs.len()`.
    pub draws: Vec<f64>,
    /// Row-major `rows x toggleable.len()`.
    pub indicators: Vec<bool>,
    pub accept_rj: Vec<u64>,
    pub proposed_rj: Vec<u64>,
    pub accept_rw: Vec<u64>,
    pub proposed_rw: Vec<u64>,
    pub meta: ChainMeta,
}

impl ChainOutput {
    pub fn rows(&self) -> usize {
        if self.coefs.is_empty() {
            0
        } else {
            self.draws.len() / self.coefs.len()
        }
    }

    pub fn dim(&self) -> usize {
        self.coefs.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.draws[i * d..(i + 1) * d]
    }

    pub fn indicator_row(&self, i: usize) -> &[bool] {
        let k = self.toggleable.len();
        &self.indicators[i * k..(i + 1) * k]
    }

    /// All recorded values of coefficient `j` (canonical position).
    pub fn column(&self, j: usize) -> Vec<f64> {
        let d = self.dim();
        self.draws.iter().skip(j).step_by(d).copied().collect()
    }

    /// Per-row inclusion flags for coefficient `j`; always-included
    /// coefficients report `true` throughout.
    pub fn inclusion_column(&self, j: usize) -> Vec<bool> {
        match self.toggleable.iter().position(|&t| t == j) {
            Some(k) => {
                let w = self.toggleable.len();
                self.indicators.iter().skip(k).step_by(w).copied().collect()
            }
            None => vec![true; self.rows()],
        }
    }

    pub fn is_toggleable(&self, j: usize) -> bool {
        self.toggleable.contains(&j)
    }

    /// Keeps only the rows selected by `keep`, in order.
    pub(crate) fn select_rows(&self, keep: impl Iterator<Item = usize>) -> ChainOutput {
        let mut out = ChainOutput {
            draws: Vec::new(),
            indicators: Vec::new(),
            ..self.clone_header()
        };
        for i in keep {
            out.draws.extend_from_slice(self.row(i));
            out.indicators.extend_from_slice(self.indicator_row(i));
        }
        out
    }

    fn clone_header(&self) -> ChainOutput {
        ChainOutput {
            coefs: self.coefs.clone(),
            names: self.names.clone(),
            toggleable: self.toggleable.clone(),
            draws: Vec::new(),
            indicators: Vec::new(),
            accept_rj: self.accept_rj.clone(),
            proposed_rj: self.proposed_rj.clone(),
            accept_rw: self.accept_rw.clone(),
            proposed_rw: self.proposed_rw.clone(),
            meta: self.meta.clone(),
        }
    }
}

/// Inclusion pattern over the toggleable coefficients of a chain, in
/// canonical order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModelPattern(pub Vec<bool>);

impl ModelPattern {
    /// Names of the included coefficients joined by `+`, or `(none)`.
    pub fn describe(&self, toggleable_names: &[String]) -> String {
        let inc: Vec<&str> = self
            .0
            .iter()
            .zip(toggleable_names)
            .filter(|(b, _)| **b)
            .map(|(_, n)| n.as_str())
            .collect();
        if inc.is_empty() {
            "(none)".to_string()
        } else {
            inc.join("+")
        }
    }
}

impl std::fmt::Display for ModelPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Relative frequency of each inclusion pattern after dropping `burn` rows.
pub fn posterior_model_probs(
    chain: &ChainOutput,
    burn: usize,
) -> Result<BTreeMap<ModelPattern, f64>> {
    let rows = chain.rows();
    if burn >= rows {
        return Err(GarmaError::EmptySample(format!(
            "no draws left after discarding {burn} of {rows}"
        )));
    }
    let mut counts: BTreeMap<ModelPattern, usize> = BTreeMap::new();
    for i in burn..rows {
        *counts
            .entry(ModelPattern(chain.indicator_row(i).to_vec()))
            .or_default() += 1;
    }
    let total = (rows - burn) as f64;
    Ok(counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / total))
        .collect())
}

/// The `k` most probable patterns, ties broken by pattern order.
pub fn top_models(probs: &BTreeMap<ModelPattern, f64>, k: usize) -> Vec<(ModelPattern, f64)> {
    let mut v: Vec<(ModelPattern, f64)> = probs.iter().map(|(m, p)| (m.clone(), *p)).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(k);
    v
}

/// Runs the sampler on a series.
pub fn run_chain(
    series: &CountSeries,
    family: &Family,
    config: &SamplerConfig,
) -> Result<ChainOutput> {
    config.validate(series.n_covariates())?;
    let model = GarmaModel::new(series.clone(), *family)?;
    let mut out = run_chain_with(&model, series.covariate_names(), config)?;
    out.meta.family = family.to_string();
    out.meta.n_obs = series.len();
    Ok(out)
}

/// Runs the sampler against an arbitrary likelihood over a model with
/// `covariate_names.len()` covariates.
pub fn run_chain_with<L: LogLikelihood>(
    lik: &L,
    covariate_names: &[String],
    config: &SamplerConfig,
) -> Result<ChainOutput> {
    let r = covariate_names.len();
    config.validate(r)?;
    let mut rng = rng_from_seed(config.seed);

    let init = config.initial_state(r);
    let coefs: Vec<Coef> = init.coefs().collect();
    let names = coefs
        .iter()
        .map(|&c| ParamState::coef_name(c, covariate_names))
        .collect();
    let toggle_coefs = config.toggleable(r);
    let toggleable: Vec<usize> = toggle_coefs.iter().map(|&c| init.flat_index(c)).collect();
    let d = coefs.len();

    let mut out = ChainOutput {
        coefs: coefs.clone(),
        names,
        toggleable,
        draws: Vec::with_capacity(config.iters * d),
        indicators: Vec::with_capacity(config.iters * toggle_coefs.len()),
        accept_rj: vec![0; d],
        proposed_rj: vec![0; d],
        accept_rw: vec![0; d],
        proposed_rw: vec![0; d],
        meta: ChainMeta {
            config: config.clone(),
            family: String::new(),
            n_obs: 0,
            burned: 0,
            thin: 1,
        },
    };

    let mut state = ChainState::new(lik, config, init);
    let mut order = toggle_coefs.clone();
    let mut included: Vec<Coef> = Vec::with_capacity(d);

    for _ in 0..config.iters {
        order.shuffle(&mut rng);
        for &coef in &order {
            if rng.random::<f64>() < config.toggle_prob {
                let j = state.params().flat_index(coef);
                out.proposed_rj[j] += 1;
                if state.rj_toggle_step(coef, &mut rng) {
                    out.accept_rj[j] += 1;
                }
            }
        }

        included.clear();
        included.extend(
            coefs
                .iter()
                .copied()
                .filter(|&c| state.params().is_included(c)),
        );
        included.shuffle(&mut rng);
        for &coef in &included {
            let j = state.params().flat_index(coef);
            out.proposed_rw[j] += 1;
            if state.rw_update_step(coef, &mut rng) {
                out.accept_rw[j] += 1;
            }
        }

        let p = state.params();
        out.draws.push(p.alpha);
        out.draws.extend_from_slice(&p.beta);
        out.draws.extend_from_slice(&p.phi);
        out.draws.extend_from_slice(&p.theta);
        out.indicators
            .extend(toggle_coefs.iter().map(|&c| p.is_included(c)));
    }
    Ok(out)
}
