//! C interface to `garma-core`.
//!
//! Every function returns a [`GarmaStatus`]; on failure a message is available
//! from [`garma_last_error`] on the same thread. Objects are handed out as
//! opaque pointers and must be released with the matching `*_free` function.
//! Borrowed pointers (draws, names) stay valid until their owner is freed.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use garma_core::diagnostics::{burn, summarize, thin};
use garma_core::{
    log_likelihood, run_chain, simulate_garma, ChainOutput, Coef, CountSeries, Family, GarmaError,
    ParamState, PriorSpec, SamplerConfig, SimSpec,
};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GarmaStatus {
    Ok = 0,
    /// A required pointer was null or a length was inconsistent.
    NullArgument = 1,
    /// Invalid data, family or configuration.
    InvalidInput = 2,
    /// The model could not be evaluated or simulated (overflow).
    Numerical = 3,
    /// Too few draws for the requested operation.
    EmptySample = 4,
    /// Any other failure, including internal panics.
    Internal = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GarmaFamilyKind {
    Poisson = 0,
    Binomial = 1,
    NegBinomial = 2,
}

/// A family and its fixed hyperparameter: `m` is read for binomial, `k` for
/// negative binomial.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GarmaFamily {
    pub kind: GarmaFamilyKind,
    pub m: u64,
    pub k: f64,
}

/// Sampler settings. Start from [`garma_sampler_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GarmaSamplerConfig {
    pub p_max: usize,
    pub q_max: usize,
    pub sd_alpha: f64,
    pub sd_phi: f64,
    pub sd_theta: f64,
    pub sd_beta: f64,
    pub inc_prob: f64,
    pub rj_scale: f64,
    pub rw_scale: f64,
    pub toggle_prob: f64,
    pub iters: usize,
    pub seed: u64,
}

/// Posterior summary of one coefficient. `geweke_z` and `ess` are NaN when
/// undefined.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GarmaCoefSummary {
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    pub hpd_lo: f64,
    pub hpd_hi: f64,
    pub q_lo: f64,
    pub q_hi: f64,
    pub ess: f64,
    pub geweke_z: f64,
    pub incl_freq: f64,
}

/// Opaque count series.
pub struct GarmaSeries {
    inner: CountSeries,
}

/// Opaque chain of posterior draws.
pub struct GarmaChain {
    inner: ChainOutput,
    names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &GarmaError) -> GarmaStatus {
    match e {
        GarmaError::NonFiniteEta { .. } | GarmaError::Generation { .. } => GarmaStatus::Numerical,
        GarmaError::EmptySample(_) => GarmaStatus::EmptySample,
        e if e.is_usage() => GarmaStatus::InvalidInput,
        _ => GarmaStatus::Internal,
    }
}

struct Failure(GarmaStatus, String);

impl From<GarmaError> for Failure {
    fn from(e: GarmaError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(GarmaStatus::NullArgument, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GarmaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            GarmaStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GarmaStatus::Internal
        }
    }
}

/// Reads `len` values; a null pointer is accepted only for `len == 0`.
unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(std::slice::from_raw_parts(p, len))
    }
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn family_of(f: &GarmaFamily) -> Result<Family, Failure> {
    Ok(match f.kind {
        GarmaFamilyKind::Poisson => Family::Poisson,
        GarmaFamilyKind::Binomial => Family::binomial(f.m)?,
        GarmaFamilyKind::NegBinomial => Family::neg_binomial(f.k)?,
    })
}

/// Message describing the last failure on this thread; empty after a
/// success. Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn garma_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn garma_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(s) => s,
            Err(_) => c"",
        };
    VERSION.as_ptr()
}

/// Creates a series from `n` counts and an optional row-major `n x r`
/// covariate matrix (covariates are named `x1..xr`).
///
/// # Safety
/// `y` must point to `n` values, `x` to `n * r` values, `out` to writable
/// storage.
#[no_mangle]
pub unsafe extern "C" fn garma_series_new(
    y: *const u64,
    n: usize,
    x: *const f64,
    r: usize,
    c: f64,
    out: *mut *mut GarmaSeries,
) -> GarmaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let y = slice(y, n, "y")?.to_vec();
        let x = slice(x, n * r, "x")?;
        let rows = if r == 0 {
            Vec::new()
        } else {
            x.chunks(r).map(<[f64]>::to_vec).collect()
        };
        let names = (1..=r).map(|j| format!("x{j}")).collect();
        let inner = CountSeries::with_covariates(y, rows, names, c)?;
        *out = Box::into_raw(Box::new(GarmaSeries { inner }));
        Ok(())
    })
}

/// Number of observations, 0 for a null handle.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn garma_series_len(series: *const GarmaSeries) -> usize {
    series.as_ref().map_or(0, |s| s.inner.len())
}

/// Borrows the counts.
///
/// # Safety
/// `series` must be a live handle and `counts`, `len` writable.
#[no_mangle]
pub unsafe extern "C" fn garma_series_counts(
    series: *const GarmaSeries,
    counts: *mut *const u64,
    len: *mut usize,
) -> GarmaStatus {
    guard(|| {
        let s = series.as_ref().ok_or_else(|| null("series"))?;
        *out_ptr(counts, "counts")? = s.inner.counts().as_ptr();
        *out_ptr(len, "len")? = s.inner.len();
        Ok(())
    })
}

/// # Safety
/// `series` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn garma_series_free(series: *mut GarmaSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Simulates `n` observations of a GARMA(p, q) model without covariates,
/// discarding `warmup` leading draws.
///
/// # Safety
/// `phi` and `theta` must point to `p` and `q` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn garma_simulate(
    family: GarmaFamily,
    alpha: f64,
    phi: *const f64,
    p: usize,
    theta: *const f64,
    q: usize,
    n: usize,
    warmup: usize,
    c: f64,
    seed: u64,
    out: *mut *mut GarmaSeries,
) -> GarmaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let params =
            ParamState::from_values(alpha, &[], slice(phi, p, "phi")?, slice(theta, q, "theta")?);
        let mut spec = SimSpec::new(family_of(&family)?, params, n, seed);
        spec.warmup = warmup;
        spec.c = c;
        let inner = simulate_garma(&spec)?;
        *out = Box::into_raw(Box::new(GarmaSeries { inner }));
        Ok(())
    })
}

/// Conditional log-likelihood of a parameter vector. Zero-valued coefficients
/// are treated as excluded.
///
/// # Safety
/// `beta`, `phi`, `theta` must point to `r`, `p`, `q` values; `series` must be
/// a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn garma_log_likelihood(
    series: *const GarmaSeries,
    family: GarmaFamily,
    alpha: f64,
    beta: *const f64,
    r: usize,
    phi: *const f64,
    p: usize,
    theta: *const f64,
    q: usize,
    out: *mut f64,
) -> GarmaStatus {
    guard(|| {
        let s = series.as_ref().ok_or_else(|| null("series"))?;
        let out = out_ptr(out, "out")?;
        if r != s.inner.n_covariates() {
            return Err(Failure(
                GarmaStatus::InvalidInput,
                format!(
                    "{r} covariate coefficients for {} covariates",
                    s.inner.n_covariates()
                ),
            ));
        }
        let params = ParamState::from_values(
            alpha,
            slice(beta, r, "beta")?,
            slice(phi, p, "phi")?,
            slice(theta, q, "theta")?,
        );
        *out = log_likelihood(&params, &s.inner, &family_of(&family)?)?;
        Ok(())
    })
}

/// The library's default sampler settings.
#[no_mangle]
pub extern "C" fn garma_sampler_config_default() -> GarmaSamplerConfig {
    let d = SamplerConfig::default();
    GarmaSamplerConfig {
        p_max: d.p_max,
        q_max: d.q_max,
        sd_alpha: d.priors.sd_alpha,
        sd_phi: d.priors.sd_phi,
        sd_theta: d.priors.sd_theta,
        sd_beta: d.priors.sd_beta,
        inc_prob: d.priors.inc_prob,
        rj_scale: d.rj_scale,
        rw_scale: d.rw_scale,
        toggle_prob: d.toggle_prob,
        iters: d.iters,
        seed: d.seed,
    }
}

fn wrap_chain(inner: ChainOutput) -> *mut GarmaChain {
    let names = inner
        .names
        .iter()
        .map(|n| CString::new(n.replace('\0', " ")).unwrap_or_default())
        .collect();
    Box::into_raw(Box::new(GarmaChain { inner, names }))
}

/// Runs the sampler. Only the intercept is exempt from birth/death moves.
///
/// # Safety
/// `series` must be a live handle, `config` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn garma_run_chain(
    series: *const GarmaSeries,
    family: GarmaFamily,
    config: *const GarmaSamplerConfig,
    out: *mut *mut GarmaChain,
) -> GarmaStatus {
    guard(|| {
        let s = series.as_ref().ok_or_else(|| null("series"))?;
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        let out = out_ptr(out, "out")?;
        let cfg = SamplerConfig {
            p_max: c.p_max,
            q_max: c.q_max,
            priors: PriorSpec {
                sd_alpha: c.sd_alpha,
                sd_phi: c.sd_phi,
                sd_theta: c.sd_theta,
                sd_beta: c.sd_beta,
                inc_prob: c.inc_prob,
            },
            rj_scale: c.rj_scale,
            rw_scale: c.rw_scale,
            iters: c.iters,
            seed: c.seed,
            always_included: vec![Coef::Alpha],
            toggle_prob: c.toggle_prob,
        };
        *out = wrap_chain(run_chain(&s.inner, &family_of(&family)?, &cfg)?);
        Ok(())
    })
}

/// Number of recorded rows, 0 for a null handle.
///
/// # Safety
/// `chain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn garma_chain_rows(chain: *const GarmaChain) -> usize {
    chain.as_ref().map_or(0, |c| c.inner.rows())
}

/// Number of coefficients per row, 0 for a null handle.
///
/// # Safety
/// `chain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn garma_chain_dim(chain: *const GarmaChain) -> usize {
    chain.as_ref().map_or(0, |c| c.inner.dim())
}

/// Name of coefficient `j` (`alpha`, `phi1`, ...), or null when out of range.
///
/// # Safety
/// `chain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn garma_chain_coef_name(
    chain: *const GarmaChain,
    j: usize,
) -> *const c_char {
    chain
        .as_ref()
        .and_then(|c| c.names.get(j))
        .map_or(ptr::null(), |n| n.as_ptr())
}

/// Borrows the row-major `rows x dim` draw matrix.
///
/// # Safety
/// `chain` must be a live handle and `draws` writable.
#[no_mangle]
pub unsafe extern "C" fn garma_chain_draws(
    chain: *const GarmaChain,
    draws: *mut *const f64,
) -> GarmaStatus {
    guard(|| {
        let c = chain.as_ref().ok_or_else(|| null("chain"))?;
        *out_ptr(draws, "draws")? = c.inner.draws.as_ptr();
        Ok(())
    })
}

/// New chain without the first `n_burn` rows, then keeping every `lag`-th.
///
/// # Safety
/// `chain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn garma_chain_burn_thin(
    chain: *const GarmaChain,
    n_burn: usize,
    lag: usize,
    out: *mut *mut GarmaChain,
) -> GarmaStatus {
    guard(|| {
        let c = chain.as_ref().ok_or_else(|| null("chain"))?;
        let out = out_ptr(out, "out")?;
        *out = wrap_chain(thin(&burn(&c.inner, n_burn)?, lag)?);
        Ok(())
    })
}

/// Writes one summary per coefficient into `out`, which must hold `cap`
/// entries; `cap` must be at least the chain's dimension.
///
/// # Safety
/// `chain` must be a live handle and `out` point to `cap` writable entries.
#[no_mangle]
pub unsafe extern "C" fn garma_chain_summary(
    chain: *const GarmaChain,
    level: f64,
    out: *mut GarmaCoefSummary,
    cap: usize,
) -> GarmaStatus {
    guard(|| {
        let c = chain.as_ref().ok_or_else(|| null("chain"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if cap < c.inner.dim() {
            return Err(Failure(
                GarmaStatus::NullArgument,
                format!(
                    "output holds {cap} entries but the chain has {} coefficients",
                    c.inner.dim()
                ),
            ));
        }
        let s = summarize(&c.inner, level)?;
        let dst = std::slice::from_raw_parts_mut(out, cap);
        for (d, s) in dst.iter_mut().zip(&s.coefs) {
            *d = GarmaCoefSummary {
                mean: s.mean,
                median: s.median,
                sd: s.sd,
                hpd_lo: s.hpd_lo,
                hpd_hi: s.hpd_hi,
                q_lo: s.q_lo,
                q_hi: s.q_hi,
                ess: s.ess,
                geweke_z: s.geweke_z.unwrap_or(f64::NAN),
                incl_freq: s.incl_freq,
            };
        }
        Ok(())
    })
}

/// # Safety
/// `chain` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn garma_chain_free(chain: *mut GarmaChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}
