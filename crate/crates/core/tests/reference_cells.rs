//! Reference posterior summaries for single simulation cells, averaged over
//! a handful of replications.

use garma_core::{run_scenario, Scenario};

fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[test]
fn gar1_binomial_summaries() {
    let s = Scenario::from_toml(
        r#"
        name = "gar1"
        family = "binomial"
        m = 15
        n = 1000
        replications = 8
        seed = 11
        burn_grid = [0, 5000]
        sigma_grid = [0.5, 5.0]
        [truth]
        alpha = -0.5
        phi = [-0.4]
        "#,
    )
    .unwrap();
    let report = run_scenario(&s, threads()).unwrap();
    assert!(report.failures.is_empty());

    let small = report.cell(0.5, 5000, 1).unwrap().coef("phi1").unwrap();
    assert!((small.mean + 0.377).abs() < 0.03, "mean {}", small.mean);
    assert!((small.sd - 0.074).abs() < 0.015, "sd {}", small.sd);

    // The default fit settings: proposal scale 5, burn-in 5000.
    let default = report.cell(5.0, 5000, 1).unwrap().coef("phi1").unwrap();
    assert!((default.mean + 0.376).abs() < 0.05, "mean {}", default.mean);
}

#[test]
fn gma1_binomial_theta() {
    let s = Scenario::from_toml(
        r#"
        name = "gma1"
        family = "binomial"
        m = 40
        n = 1000
        replications = 8
        seed = 33
        burn_grid = [0]
        sigma_grid = [0.5]
        [truth]
        alpha = -0.5
        theta = [-0.5]
        "#,
    )
    .unwrap();
    let report = run_scenario(&s, threads()).unwrap();
    let theta = report.cell(0.5, 0, 1).unwrap().coef("theta1").unwrap();
    assert!((theta.mean + 0.402).abs() < 0.05, "mean {}", theta.mean);
}
