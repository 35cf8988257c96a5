//! Post-processing of chains: burn-in, thinning, credible intervals,
//! effective sample size, Geweke's convergence diagnostic and per-coefficient
//! summaries.
//!
//! Spectral densities at frequency zero come from an autoregressive fit:
//! Yule-Walker estimates for every order `0..=min(n-1, floor(10 log10 n))`,
//! the order minimizing `n log(v_k) + 2k` is kept (first minimum on ties),
//! and `S(0) = v / (1 - sum(a))^2` with the innovation variance
//! bias-corrected by `n / (n - order - 1)`.

use crate::error::{GarmaError, Result};
use crate::model::{Coef, ParamState};
use crate::sampler::ChainOutput;

/// Drops the first `n_burn` rows. Acceptance counters are left untouched.
pub fn burn(chain: &ChainOutput, n_burn: usize) -> Result<ChainOutput> {
    let rows = chain.rows();
    if n_burn >= rows {
        return Err(GarmaError::InvalidConfig(format!(
            "burn-in of {n_burn} leaves no draws from a chain of {rows} rows"
        )));
    }
    let mut out = chain.select_rows(n_burn..rows);
    out.meta.burned += n_burn * chain.meta.thin;
    Ok(out)
}

/// Keeps rows `0, lag, 2 lag, ...`.
pub fn thin(chain: &ChainOutput, lag: usize) -> Result<ChainOutput> {
    if lag == 0 {
        return Err(GarmaError::InvalidConfig(
            "thinning lag must be at least 1".into(),
        ));
    }
    let mut out = chain.select_rows((0..chain.rows()).step_by(lag));
    out.meta.thin *= lag;
    Ok(out)
}

fn check_sample(sample: &[f64], what: &str) -> Result<()> {
    if sample.is_empty() {
        return Err(GarmaError::EmptySample(format!(
            "{what} of an empty sample"
        )));
    }
    Ok(())
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(GarmaError::InvalidConfig(format!(
            "credible level must lie in (0, 1), got {level}"
        )));
    }
    Ok(())
}

fn sorted(sample: &[f64]) -> Vec<f64> {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Number of sample points an HPD window must cover.
pub fn hpd_window(n: usize, level: f64) -> usize {
    // The 1e-9 guard keeps e.g. 0.07 * 100 = 7.000000000000001 from rounding up to 8.
    let w = (level * n as f64 - 1e-9).ceil() as usize;
    w.clamp(1, n)
}

/// Shortest interval covering `ceil(level * n)` sorted draws; ties go to the
/// window with the smallest lower endpoint.
pub fn hpd_interval(sample: &[f64], level: f64) -> Result<(f64, f64)> {
    check_sample(sample, "HPD interval")?;
    check_level(level)?;
    let x = sorted(sample);
    Ok(hpd_sorted(&x, level))
}

fn hpd_sorted(x: &[f64], level: f64) -> (f64, f64) {
    let n = x.len();
    let w = hpd_window(n, level);
    let mut best = 0;
    let mut best_width = f64::INFINITY;
    for i in 0..=n - w {
        let width = x[i + w - 1] - x[i];
        if width < best_width {
            best_width = width;
            best = i;
        }
    }
    (x[best], x[best + w - 1])
}

/// Type-7 empirical quantile of sorted data: `h = (n - 1) p`,
/// `Q = x[floor h] + (h - floor h) (x[floor h + 1] - x[floor h])`.
pub fn quantile_sorted(x: &[f64], p: f64) -> f64 {
    let n = x.len();
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return x[n - 1];
    }
    let frac = h - lo as f64;
    if frac == 0.0 {
        x[lo]
    } else {
        x[lo] + frac * (x[lo + 1] - x[lo])
    }
}

/// Equal-tail interval from type-7 quantiles.
pub fn quantile_interval(sample: &[f64], level: f64) -> Result<(f64, f64)> {
    check_sample(sample, "quantile interval")?;
    check_level(level)?;
    let x = sorted(sample);
    Ok(equal_tail_sorted(&x, level))
}

fn equal_tail_sorted(x: &[f64], level: f64) -> (f64, f64) {
    let a = (1.0 - level) / 2.0;
    (quantile_sorted(x, a), quantile_sorted(x, 1.0 - a))
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with denominator `n - 1`.
fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|&v| v == x[0])
}

/// Autoregressive fit chosen by AIC.
#[derive(Debug, Clone, PartialEq)]
pub struct ArFit {
    pub coefficients: Vec<f64>,
    /// Bias-corrected innovation variance.
    pub var_pred: f64,
}

impl ArFit {
    /// Spectral density at frequency zero.
    pub fn spectrum0(&self) -> f64 {
        let s: f64 = self.coefficients.iter().sum();
        self.var_pred / ((1.0 - s) * (1.0 - s))
    }
}

/// Yule-Walker AR fit with AIC order selection. `None` for samples of fewer
/// than two points or with zero variance.
pub fn ar_yule_walker(x: &[f64]) -> Option<ArFit> {
    let n = x.len();
    if n < 2 || is_constant(x) {
        return None;
    }
    let order_max = ((10.0 * (n as f64).log10()).floor() as usize).min(n - 1);
    let m = mean(x);
    let centered: Vec<f64> = x.iter().map(|v| v - m).collect();
    let acov: Vec<f64> = (0..=order_max)
        .map(|lag| {
            centered[..n - lag]
                .iter()
                .zip(&centered[lag..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64
        })
        .collect();
    if acov[0] <= 0.0 {
        return None;
    }

    // Levinson-Durbin: coefs[k] holds the order-(k+1) coefficients.
    let nf = n as f64;
    let mut vars = vec![acov[0]];
    let mut coefs: Vec<Vec<f64>> = Vec::with_capacity(order_max);
    let mut prev: Vec<f64> = Vec::new();
    for k in 1..=order_max {
        let v_prev = vars[k - 1];
        let num = acov[k]
            - prev
                .iter()
                .enumerate()
                .map(|(j, a)| a * acov[k - 1 - j])
                .sum::<f64>();
        let refl = num / v_prev;
        let mut cur = Vec::with_capacity(k);
        for j in 0..k - 1 {
            cur.push(prev[j] - refl * prev[k - 2 - j]);
        }
        cur.push(refl);
        let v = v_prev * (1.0 - refl * refl);
        if !(v > 0.0 && v.is_finite()) {
            break;
        }
        vars.push(v);
        coefs.push(cur.clone());
        prev = cur;
    }

    let mut best = 0;
    let mut best_aic = f64::INFINITY;
    for (k, &v) in vars.iter().enumerate() {
        let aic = nf * v.ln() + 2.0 * k as f64;
        if aic < best_aic {
            best_aic = aic;
            best = k;
        }
    }
    let coefficients = if best == 0 {
        Vec::new()
    } else {
        coefs[best - 1].clone()
    };
    let var_pred = vars[best] * nf / (nf - (best as f64 + 1.0));
    Some(ArFit {
        coefficients,
        var_pred,
    })
}

/// Spectral density at zero; 0 for constant samples.
pub fn spectrum0(x: &[f64]) -> f64 {
    ar_yule_walker(x).map_or(0.0, |f| f.spectrum0())
}

/// `n Var(x) / S(0)`; zero-variance samples give 0.
pub fn effective_sample_size(sample: &[f64]) -> Result<f64> {
    if sample.len() < 10 {
        return Err(GarmaError::EmptySample(format!(
            "effective sample size needs at least 10 draws, got {}",
            sample.len()
        )));
    }
    if is_constant(sample) {
        return Ok(0.0);
    }
    let s0 = spectrum0(sample);
    if s0 <= 0.0 || !s0.is_finite() {
        return Ok(0.0);
    }
    Ok(sample.len() as f64 * variance(sample) / s0)
}

/// Geweke's z comparing the first `frac_first` and the last `frac_last` of a
/// chain: `(mean_A - mean_B) / sqrt(S_A(0)/n_A + S_B(0)/n_B)`.
///
/// Segments are the first `floor(frac_first n)` and last
/// `floor(frac_last n)` draws. `Ok(None)` when a segment has zero variance.
pub fn geweke_z(sample: &[f64], frac_first: f64, frac_last: f64) -> Result<Option<f64>> {
    if !(frac_first > 0.0 && frac_last > 0.0 && frac_first + frac_last <= 1.0) {
        return Err(GarmaError::InvalidConfig(format!(
            "Geweke fractions must be positive and sum to at most 1, got {frac_first} and {frac_last}"
        )));
    }
    let n = sample.len();
    let na = (frac_first * n as f64).floor() as usize;
    let nb = (frac_last * n as f64).floor() as usize;
    if na < 10 || nb < 10 {
        return Err(GarmaError::EmptySample(format!(
            "Geweke segments need at least 10 draws each, got {na} and {nb}"
        )));
    }
    let a = &sample[..na];
    let b = &sample[n - nb..];
    if is_constant(a) || is_constant(b) {
        return Ok(None);
    }
    let se2 = spectrum0(a) / na as f64 + spectrum0(b) / nb as f64;
    if !(se2 > 0.0 && se2.is_finite()) {
        return Ok(None);
    }
    Ok(Some((mean(a) - mean(b)) / se2.sqrt()))
}

/// Posterior summary of one coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefSummary {
    pub coef: Coef,
    pub name: String,
    pub toggleable: bool,
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    pub hpd_lo: f64,
    pub hpd_hi: f64,
    pub q_lo: f64,
    pub q_hi: f64,
    /// NaN when the chain is too short to estimate it.
    pub ess: f64,
    /// `None` when undefined (zero-variance segment or too few draws).
    pub geweke_z: Option<f64>,
    pub incl_freq: f64,
}

impl CoefSummary {
    pub fn interval(&self, kind: IntervalKind) -> (f64, f64) {
        match kind {
            IntervalKind::Hpd => (self.hpd_lo, self.hpd_hi),
            IntervalKind::Quantile => (self.q_lo, self.q_hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub level: f64,
    pub coefs: Vec<CoefSummary>,
}

impl PosteriorSummary {
    pub fn get(&self, name: &str) -> Option<&CoefSummary> {
        self.coefs.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalKind {
    Hpd,
    Quantile,
}

/// `(mean, median, sd, hpd, equal_tail)` of one sample.
pub type SampleSummary = (f64, f64, f64, (f64, f64), (f64, f64));

/// Summarizes one sample of draws.
pub fn summarize_sample(sample: &[f64], level: f64) -> Result<SampleSummary> {
    check_sample(sample, "summary")?;
    check_level(level)?;
    let x = sorted(sample);
    let m = mean(sample);
    let sd = if sample.len() > 1 {
        variance(sample).sqrt()
    } else {
        0.0
    };
    Ok((
        m,
        quantile_sorted(&x, 0.5),
        sd,
        hpd_sorted(&x, level),
        equal_tail_sorted(&x, level),
    ))
}

/// Per-coefficient summaries over all rows, zeros from excluded iterations
/// included.
pub fn summarize(chain: &ChainOutput, level: f64) -> Result<PosteriorSummary> {
    if chain.rows() == 0 {
        return Err(GarmaError::EmptySample(
            "cannot summarize an empty chain".into(),
        ));
    }
    check_level(level)?;
    let mut coefs = Vec::with_capacity(chain.dim());
    for j in 0..chain.dim() {
        let col = chain.column(j);
        let (mean, median, sd, (hpd_lo, hpd_hi), (q_lo, q_hi)) = summarize_sample(&col, level)?;
        let ess = effective_sample_size(&col).unwrap_or(f64::NAN);
        let geweke = geweke_z(&col, 0.1, 0.5).ok().flatten();
        let incl = chain.inclusion_column(j);
        let incl_freq = incl.iter().filter(|&&b| b).count() as f64 / incl.len() as f64;
        coefs.push(CoefSummary {
            coef: chain.coefs[j],
            name: chain.names[j].clone(),
            toggleable: chain.is_toggleable(j),
            mean,
            median,
            sd,
            hpd_lo,
            hpd_hi,
            q_lo,
            q_hi,
            ess,
            geweke_z: geweke,
            incl_freq,
        });
    }
    Ok(PosteriorSummary { level, coefs })
}

/// Whether the chosen intervals flag every toggleable coefficient correctly:
/// non-zero truths must have intervals excluding zero, zero truths intervals
/// containing it.
pub fn classify_model(
    summary: &PosteriorSummary,
    truth: &ParamState,
    kind: IntervalKind,
) -> Result<bool> {
    for s in summary.coefs.iter().filter(|s| s.toggleable) {
        if !truth.contains(s.coef) {
            return Err(GarmaError::Dimension(format!(
                "truth has no coefficient {}",
                s.name
            )));
        }
        let (lo, hi) = s.interval(kind);
        let covers_zero = lo <= 0.0 && 0.0 <= hi;
        let nonzero = truth.value(s.coef) != 0.0;
        if nonzero == covers_zero {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{run_chain_with, FlatLikelihood, SamplerConfig};

    fn chain(rows: usize) -> ChainOutput {
        let cfg = SamplerConfig {
            p_max: 1,
            q_max: 1,
            iters: rows,
            ..SamplerConfig::default()
        };
        run_chain_with(&FlatLikelihood, &[], &cfg).unwrap()
    }

    #[test]
    fn burn_examples() {
        let c = chain(10);
        let b = burn(&c, 3).unwrap();
        assert_eq!(b.rows(), 7);
        for i in 0..7 {
            assert_eq!(b.row(i), c.row(i + 3));
            assert_eq!(b.indicator_row(i), c.indicator_row(i + 3));
        }
        assert_eq!(b.accept_rw, c.accept_rw);
        assert_eq!(b.meta.burned, 3);
        assert_eq!(burn(&c, 0).unwrap(), c);
        assert!(burn(&c, 10).is_err());
    }

    #[test]
    fn thin_examples() {
        let c = chain(10);
        let t = thin(&c, 4).unwrap();
        assert_eq!(t.rows(), 3);
        for (k, i) in [0, 4, 8].into_iter().enumerate() {
            assert_eq!(t.row(k), c.row(i));
        }
        assert_eq!(thin(&c, 1).unwrap(), c);
        assert!(thin(&c, 0).is_err());
        assert_eq!(thin(&chain(30_000), 20).unwrap().rows(), 1500);
    }

    #[test]
    fn hpd_examples() {
        let seq: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(hpd_interval(&seq, 0.95).unwrap(), (1.0, 950.0));
        let mut spike = vec![0.0; 9];
        spike.push(100.0);
        assert_eq!(hpd_interval(&spike, 0.9).unwrap(), (0.0, 0.0));
        assert!(hpd_interval(&[], 0.9).is_err());
    }

    #[test]
    fn quantile_examples() {
        let seq: Vec<f64> = (1..=100).map(f64::from).collect();
        let (lo, hi) = quantile_interval(&seq, 0.5).unwrap();
        assert!((lo - 25.75).abs() < 1e-12 && (hi - 75.25).abs() < 1e-12);
        assert_eq!(quantile_interval(&[2.5; 7], 0.95).unwrap(), (2.5, 2.5));
        assert!(quantile_interval(&[], 0.5).is_err());
        assert_eq!(quantile_sorted(&[3.0], 0.3), 3.0);
    }

    #[test]
    fn ess_of_constant_is_zero() {
        assert_eq!(effective_sample_size(&[1.5; 100]).unwrap(), 0.0);
        assert!(effective_sample_size(&[1.0; 9]).is_err());
    }

    #[test]
    fn ar_fit_recovers_white_noise_variance() {
        // Alternating sequence: perfectly predictable by AR(1) with a = -1,
        // which the recursion must survive.
        let x: Vec<f64> = (0..200)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let fit = ar_yule_walker(&x).unwrap();
        assert!(fit.var_pred.is_finite());
    }

    #[test]
    fn geweke_undefined_for_constant_segments() {
        assert_eq!(geweke_z(&[4.0; 200], 0.1, 0.5).unwrap(), None);
        assert!(geweke_z(&[1.0; 50], 0.1, 0.5).is_err());
        assert!(geweke_z(&[1.0; 500], 0.6, 0.5).is_err());
    }

    fn summary_with(intervals: &[(&str, Coef, (f64, f64))]) -> PosteriorSummary {
        PosteriorSummary {
            level: 0.95,
            coefs: intervals
                .iter()
                .map(|&(name, coef, (lo, hi))| CoefSummary {
                    coef,
                    name: name.into(),
                    toggleable: coef != Coef::Alpha,
                    mean: 0.0,
                    median: 0.0,
                    sd: 0.0,
                    hpd_lo: lo,
                    hpd_hi: hi,
                    q_lo: lo,
                    q_hi: hi,
                    ess: 0.0,
                    geweke_z: None,
                    incl_freq: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn classify_examples() {
        let truth = ParamState::from_values(-0.5, &[], &[-0.4, 0.0], &[0.0]);
        let good = summary_with(&[
            ("alpha", Coef::Alpha, (-0.7, -0.3)),
            ("phi1", Coef::Phi(0), (-0.5, -0.3)),
            ("phi2", Coef::Phi(1), (-0.1, 0.1)),
            ("theta1", Coef::Theta(0), (0.0, 0.0)),
        ]);
        assert!(classify_model(&good, &truth, IntervalKind::Hpd).unwrap());
        let bad = summary_with(&[
            ("alpha", Coef::Alpha, (-0.7, -0.3)),
            ("phi1", Coef::Phi(0), (-0.5, 0.1)),
            ("phi2", Coef::Phi(1), (-0.1, 0.1)),
            ("theta1", Coef::Theta(0), (0.0, 0.0)),
        ]);
        assert!(!classify_model(&bad, &truth, IntervalKind::Hpd).unwrap());

        let zero = ParamState::empty(0, 2, 1);
        let all_cover = summary_with(&[
            ("phi1", Coef::Phi(0), (-0.2, 0.3)),
            ("phi2", Coef::Phi(1), (0.0, 0.0)),
            ("theta1", Coef::Theta(0), (-1.0, 0.0)),
        ]);
        assert!(classify_model(&all_cover, &zero, IntervalKind::Quantile).unwrap());
        let spurious = summary_with(&[("phi1", Coef::Phi(0), (0.1, 0.3))]);
        assert!(!classify_model(&spurious, &zero, IntervalKind::Hpd).unwrap());
    }

    #[test]
    fn never_included_coefficient_summarizes_to_zero() {
        let mut cfg = SamplerConfig {
            p_max: 1,
            q_max: 0,
            iters: 500,
            ..SamplerConfig::default()
        };
        cfg.priors.inc_prob = 0.0;
        let c = run_chain_with(&FlatLikelihood, &[], &cfg).unwrap();
        let s = summarize(&c, 0.95).unwrap();
        let phi = s.get("phi1").unwrap();
        assert_eq!((phi.mean, phi.median), (0.0, 0.0));
        assert_eq!((phi.hpd_lo, phi.hpd_hi), (0.0, 0.0));
        assert_eq!((phi.q_lo, phi.q_hi), (0.0, 0.0));
        assert_eq!(phi.incl_freq, 0.0);
        assert_eq!(phi.ess, 0.0);
        assert_eq!(phi.geweke_z, None);
        assert_eq!(s.get("alpha").unwrap().incl_freq, 1.0);
    }
}
