//! Bayesian order selection and estimation for GARMA(p, q) models of count
//! time series.
//!
//! The sampler explores the union of all sub-models of a GARMA(p_max, q_max)
//! model by toggling individual AR, MA and covariate coefficients in and out
//! (birth/death moves) and refreshing included values with random-walk
//! Metropolis updates.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod io;
pub mod model;
pub mod sampler;
pub mod seed;
pub mod simulate;

pub use diagnostics::{
    burn, classify_model, effective_sample_size, geweke_z, hpd_interval, quantile_interval,
    summarize, thin, IntervalKind, PosteriorSummary,
};
pub use error::{GarmaError, Result};
pub use harness::{compare_reports, run_scenario, Scenario, ScenarioReport};
pub use model::{
    clip, log_likelihood, log_prior, mu_path, Coef, CountSeries, Family, GarmaModel, MuPath,
    ParamState, PriorSpec,
};
pub use sampler::{
    posterior_model_probs, run_chain, run_chain_with, top_models, ChainOutput, ChainState,
    LogLikelihood, ModelPattern, SamplerConfig,
};
pub use simulate::{simulate_garma, Covariate, SimSpec};
