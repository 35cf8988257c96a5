//! Brute-force reference implementations shared by the integration tests.

#![allow(dead_code)]

use garma_core::{CountSeries, Family, ParamState, SimSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Inverse link evaluated literally: `exp(eta)` or `m e^eta / (1 + e^eta)`.
pub fn naive_mean(family: &Family, eta: f64) -> f64 {
    match *family {
        Family::Poisson | Family::NegBinomial { .. } => eta.exp(),
        Family::Binomial { m } => m as f64 * eta.exp() / (1.0 + eta.exp()),
    }
}

/// Linear predictors by a double loop over time and lags. Residuals are
/// recomputed from the stored predictors on every use.
pub fn naive_eta(params: &ParamState, series: &CountSeries, family: &Family) -> Vec<f64> {
    let n = series.len();
    let c = series.clip_constant();
    let y = series.counts();
    let ystar = |s: usize| (y[s] as f64).max(c);
    let xb = |s: usize| -> f64 {
        series
            .covariates(s)
            .iter()
            .zip(&params.beta)
            .map(|(x, b)| x * b)
            .sum()
    };
    let mut eta = vec![0.0; n];
    for t in 0..n {
        let mut e = params.alpha + xb(t);
        for j in 1..=params.phi.len() {
            if t >= j {
                e += params.phi[j - 1] * (ystar(t - j).ln() - xb(t - j));
            }
        }
        for j in 1..=params.theta.len() {
            if t >= j {
                let s = t - j;
                let r = ystar(s).ln() - naive_mean(family, eta[s]).ln();
                e += params.theta[j - 1] * r;
            }
        }
        eta[t] = e;
    }
    eta
}

fn ln_factorial(y: u64) -> f64 {
    (1..=y).map(|i| (i as f64).ln()).sum()
}

/// Log pmf from the textbook formulas, products expanded as sums of logs.
pub fn naive_log_pmf(family: &Family, y: u64, mu: f64) -> f64 {
    let yf = y as f64;
    match *family {
        Family::Poisson => yf * mu.ln() - mu - ln_factorial(y),
        Family::Binomial { m } => {
            let p = mu / m as f64;
            let ln_choose: f64 = (1..=y).map(|i| ((m - y + i) as f64 / i as f64).ln()).sum();
            ln_choose + yf * p.ln() + (m - y) as f64 * (1.0 - p).ln()
        }
        Family::NegBinomial { k } => {
            // Gamma(k + y) / Gamma(k) = prod_{i<y} (k + i)
            let rising: f64 = (0..y).map(|i| (k + i as f64).ln()).sum();
            rising - ln_factorial(y) + k * (k / (mu + k)).ln() + yf * (mu / (mu + k)).ln()
        }
    }
}

pub fn naive_log_likelihood(params: &ParamState, series: &CountSeries, family: &Family) -> f64 {
    naive_eta(params, series, family)
        .iter()
        .zip(series.counts())
        .map(|(&e, &y)| naive_log_pmf(family, y, naive_mean(family, e)))
        .sum()
}

pub fn random_family(rng: &mut ChaCha8Rng) -> Family {
    match rng.random_range(0..3) {
        0 => Family::Poisson,
        1 => Family::Binomial {
            m: rng.random_range(1..=40),
        },
        _ => Family::NegBinomial {
            k: rng.random_range(0.5..20.0),
        },
    }
}

/// Random parameters with orders up to (3, 3) and up to two covariates; each
/// coefficient is zero with probability 0.3.
pub fn random_params(rng: &mut ChaCha8Rng, r: usize) -> ParamState {
    let p = rng.random_range(0..=3);
    let q = rng.random_range(0..=3);
    let mut coef = |scale: f64| {
        if rng.random_bool(0.3) {
            0.0
        } else {
            rng.random_range(-scale..scale)
        }
    };
    let beta: Vec<f64> = (0..r).map(|_| coef(0.3)).collect();
    let phi: Vec<f64> = (0..p).map(|_| coef(0.5)).collect();
    let theta: Vec<f64> = (0..q).map(|_| coef(0.5)).collect();
    let alpha = rng.random_range(-1.0..1.5);
    ParamState::from_values(alpha, &beta, &phi, &theta)
}

/// A random family and series (n <= 50) together with a different random
/// parameter vector at which to evaluate the likelihood.
pub fn random_case(rng: &mut ChaCha8Rng) -> (ParamState, CountSeries, Family) {
    let family = random_family(rng);
    let n = rng.random_range(1..=50);
    let r = rng.random_range(0..=2);
    let mut gen = random_params(rng, 0);
    // Keep the generating recursion away from explosive regions.
    let total: f64 = gen.phi.iter().chain(&gen.theta).map(|v| v.abs()).sum();
    if total > 0.8 {
        for v in gen.phi.iter_mut().chain(gen.theta.iter_mut()) {
            *v *= 0.8 / total;
        }
    }
    let series = garma_core::simulate_garma(&SimSpec::new(family, gen, n, rng.random())).unwrap();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..r).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let names = (1..=r).map(|j| format!("x{j}")).collect();
    let c = rng.random_range(0.05..0.95);
    let series = CountSeries::with_covariates(series.counts().to_vec(), rows, names, c).unwrap();
    (random_params(rng, r), series, family)
}

/// Absolute tolerance 1e-10, relaxed in proportion once |ll| exceeds one.
pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0)
}

/// Sampler settings for a prior-only run where every birth proposal equals
/// the prior.
pub fn prior_config(
    p: usize,
    q: usize,
    sd: f64,
    iters: usize,
    seed: u64,
) -> garma_core::SamplerConfig {
    garma_core::SamplerConfig {
        p_max: p,
        q_max: q,
        priors: garma_core::PriorSpec {
            sd_alpha: sd,
            sd_phi: sd,
            sd_theta: sd,
            sd_beta: sd,
            inc_prob: 0.5,
        },
        rj_scale: sd,
        iters,
        seed,
        ..garma_core::SamplerConfig::default()
    }
}

pub fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

pub fn iid_normals(n: usize, seed: u64) -> Vec<f64> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Stationary Gaussian AR(1) path with unit innovation variance.
pub fn ar1(n: usize, rho: f64, seed: u64) -> Vec<f64> {
    let e = iid_normals(n, seed);
    let mut x = Vec::with_capacity(n);
    let mut prev = e[0] / (1.0 - rho * rho).sqrt();
    x.push(prev);
    for v in &e[1..] {
        prev = rho * prev + v;
        x.push(prev);
    }
    x
}

/// Shortest width over every interval with endpoints at sample values that
/// contains at least `w` points. Every (lo, hi) pair is tried; points inside
/// are counted against a sorted copy.
pub fn brute_force_hpd_width(sample: &[f64], w: usize) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let mut best = f64::INFINITY;
    for &lo in sample {
        let below = s.partition_point(|&v| v < lo);
        for &hi in sample {
            if hi < lo || hi - lo >= best {
                continue;
            }
            let inside = s.partition_point(|&v| v <= hi) - below;
            if inside >= w {
                best = hi - lo;
            }
        }
    }
    best
}

/// Shared check for the HPD equivalence: `Err` describes the first mismatch.
pub fn check_hpd_against_scan(sample: &[f64], level: f64) -> Result<(), String> {
    let (lo, hi) = garma_core::hpd_interval(sample, level).map_err(|e| e.to_string())?;
    let n = sample.len();
    let w = ((level * n as f64) - 1e-9).ceil().max(1.0) as usize;
    let inside = sample.iter().filter(|&&v| v >= lo && v <= hi).count();
    if inside < w {
        return Err(format!("({lo}, {hi}) covers {inside} < {w} points"));
    }
    let best = brute_force_hpd_width(sample, w);
    if hi - lo > best {
        return Err(format!("width {} but {best} is achievable", hi - lo));
    }
    Ok(())
}
