mod common;

use common::{ar1, check_hpd_against_scan, iid_normals, prior_config};
use garma_core::diagnostics::quantile_sorted;
use garma_core::sampler::FlatLikelihood;
use garma_core::{
    burn, effective_sample_size, geweke_z, hpd_interval, quantile_interval, run_chain_with,
    summarize, thin, ChainOutput,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

/// A prior-only chain whose first column is replaced by `values`.
fn chain_with_alpha(values: &[f64]) -> ChainOutput {
    let config = prior_config(1, 0, 0.3, values.len(), 1);
    let mut chain = run_chain_with(&FlatLikelihood, &[], &config).unwrap();
    let d = chain.dim();
    for (i, v) in values.iter().enumerate() {
        chain.draws[i * d] = *v;
    }
    chain
}

fn sample_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        prop::collection::vec(-50.0f64..50.0, 1..200),
        // Heavy ties.
        prop::collection::vec((0i32..8).prop_map(f64::from), 1..200),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hpd_matches_exhaustive_scan(sample in sample_strategy(), level in 0.05f64..0.99) {
        prop_assert_eq!(check_hpd_against_scan(&sample, level), Ok(()));
    }

    #[test]
    fn equal_tail_monotone_in_level(sample in sample_strategy(), a in 0.01f64..0.99, b in 0.01f64..0.99) {
        let (lo_l, hi_l) = (a.min(b), a.max(b));
        let (l1, h1) = quantile_interval(&sample, lo_l).unwrap();
        let (l2, h2) = quantile_interval(&sample, hi_l).unwrap();
        prop_assert!(l2 <= l1 && h1 <= h2);
        prop_assert!(l1 <= h1);
    }

    #[test]
    fn burn_then_thin_selects_documented_rows(
        rows in 2usize..60,
        b in 0usize..60,
        lag in 1usize..7,
    ) {
        prop_assume!(b < rows);
        let values: Vec<f64> = (0..rows).map(|i| i as f64).collect();
        let chain = chain_with_alpha(&values);
        let bt = thin(&burn(&chain, b).unwrap(), lag).unwrap();
        let expected: Vec<f64> = (b..rows).step_by(lag).map(|i| i as f64).collect();
        prop_assert_eq!(bt.column(0), expected);
        prop_assert_eq!(bt.meta.burned, b);

        // Thinning first keeps rows 0, lag, ...; burning k of those drops
        // the first k * lag original rows.
        let t = thin(&chain, lag).unwrap();
        let k = b / lag;
        if k < t.rows() {
            let tb = burn(&t, k).unwrap();
            let expected: Vec<f64> = (0..rows).step_by(lag).skip(k).map(|i| i as f64).collect();
            prop_assert_eq!(tb.column(0), expected);
            prop_assert_eq!(tb.meta.burned, k * lag);
        }
    }
}

#[test]
fn documented_burn_thin_cases() {
    let chain = chain_with_alpha(&(1..=10).map(f64::from).collect::<Vec<_>>());
    assert_eq!(
        burn(&chain, 3).unwrap().column(0),
        (4..=10).map(f64::from).collect::<Vec<_>>()
    );
    assert_eq!(burn(&chain, 0).unwrap(), chain);
    assert!(burn(&chain, 10).is_err());
    assert_eq!(thin(&chain, 4).unwrap().column(0), vec![1.0, 5.0, 9.0]);
    assert_eq!(thin(&chain, 1).unwrap(), chain);
    assert!(thin(&chain, 0).is_err());
    let long = chain_with_alpha(&vec![0.0; 30_000]);
    assert_eq!(thin(&long, 20).unwrap().rows(), 1500);
}

#[test]
fn hpd_documented_cases() {
    let seq: Vec<f64> = (1..=1000).map(f64::from).collect();
    assert_eq!(hpd_interval(&seq, 0.95).unwrap(), (1.0, 950.0));
    let mut spike = vec![0.0; 9];
    spike.push(100.0);
    assert_eq!(hpd_interval(&spike, 0.9).unwrap(), (0.0, 0.0));
    assert!(hpd_interval(&[], 0.9).is_err());
}

#[test]
fn hpd_narrower_than_equal_tail_for_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x: Vec<f64> = (0..50_000).map(|_| Exp1.sample(&mut rng)).collect();
    let (a, b) = hpd_interval(&x, 0.95).unwrap();
    let (c, d) = quantile_interval(&x, 0.95).unwrap();
    assert!(b - a < d - c, "HPD {} vs equal-tail {}", b - a, d - c);
}

#[test]
fn quantile_documented_cases() {
    let seq: Vec<f64> = (1..=100).map(f64::from).collect();
    assert_eq!(quantile_interval(&seq, 0.5).unwrap(), (25.75, 75.25));
    assert_eq!(quantile_interval(&[2.5; 17], 0.9).unwrap(), (2.5, 2.5));
    assert_eq!(quantile_sorted(&[1.0, 3.0], 0.25), 1.5);

    let x = iid_normals(50_000, 8);
    let (lo, hi) = quantile_interval(&x, 0.95).unwrap();
    // Monte Carlo sd of a 2.5% quantile at this size is about 0.011.
    assert!((lo + hi).abs() < 0.05, "{lo} {hi}");
}

#[test]
fn ess_iid_normals() {
    let x = iid_normals(10_000, 21);
    let ess = effective_sample_size(&x).unwrap();
    assert!((ess / 1e4 - 1.0).abs() < 0.15, "{ess}");
}

#[test]
fn ess_ar1() {
    let x = ar1(100_000, 0.9, 22);
    let ess = effective_sample_size(&x).unwrap();
    let target = 1e5 * 0.1 / 1.9;
    assert!((ess / target - 1.0).abs() < 0.2, "{ess} vs {target}");
}

#[test]
fn ess_edge_cases() {
    assert_eq!(effective_sample_size(&[4.0; 50]).unwrap(), 0.0);
    assert!(effective_sample_size(&[1.0, 2.0, 3.0]).is_err());
}

#[test]
fn geweke_size_under_null() {
    let mut below = 0;
    for seed in 0..500 {
        let z = geweke_z(&iid_normals(10_000, 1000 + seed), 0.1, 0.5)
            .unwrap()
            .unwrap();
        if z.abs() < 1.96 {
            below += 1;
        }
    }
    assert!(below >= 465, "{below} of 500");
}

#[test]
fn geweke_detects_shift() {
    let mut x = iid_normals(10_000, 31);
    for v in &mut x[5000..] {
        *v += 1.0;
    }
    let z = geweke_z(&x, 0.1, 0.5).unwrap().unwrap();
    assert!(z.abs() > 10.0, "{z}");
    let mut flat = vec![1.0; 100];
    flat[50] = 2.0;
    assert_eq!(geweke_z(&flat, 0.1, 0.5).unwrap(), None);
}

#[test]
fn summarize_iid_normal_chain() {
    let n = 20_000;
    let x: Vec<f64> = iid_normals(n, 41).iter().map(|v| 2.0 + 0.5 * v).collect();
    let chain = chain_with_alpha(&x);
    let s = summarize(&chain, 0.95).unwrap();
    let a = s.get("alpha").unwrap();
    let se_mean = 0.5 / (n as f64).sqrt();
    let se_sd = 0.5 / (2.0 * (n as f64 - 1.0)).sqrt();
    assert!((a.mean - 2.0).abs() < 4.0 * se_mean, "{}", a.mean);
    assert!((a.sd - 0.5).abs() < 4.0 * se_sd, "{}", a.sd);
    assert_eq!(a.incl_freq, 1.0);
}

#[test]
fn summarize_always_excluded_coefficient() {
    let mut chain = chain_with_alpha(&iid_normals(500, 2));
    let d = chain.dim();
    for i in 0..chain.rows() {
        chain.draws[i * d + 1] = 0.0;
        chain.indicators[i] = false;
    }
    let s = summarize(&chain, 0.95).unwrap();
    let p = s.get("phi1").unwrap();
    assert_eq!(
        (p.mean, p.median, p.hpd_lo, p.hpd_hi, p.incl_freq),
        (0.0, 0.0, 0.0, 0.0, 0.0)
    );
    assert_eq!(p.ess, 0.0);
    assert_eq!(p.geweke_z, None);
}

#[test]
fn summarize_prior_alpha() {
    let config = prior_config(0, 0, 0.3, 50_000, 77);
    let chain = run_chain_with(&FlatLikelihood, &[], &config).unwrap();
    let s = summarize(&chain, 0.95).unwrap();
    assert!(s.get("alpha").unwrap().mean.abs() < 0.02);
}
