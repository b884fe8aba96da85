use legadapt::campaign::{calibrate_c_tail, run_campaign, CampaignConfig, IntervalTag};
use legadapt::core::estimators::Problem;
use legadapt::core::truth::{make_truth, ClassSpec};
use legadapt::noise::{NoiseKind, NoiseModel};
use legadapt::simulate::{simulate_regression, trial_rng};

const W_REGRESSION: &str = r#"
problem = "regression"
n = [512, 2048, 8192]
trials = 200
seed = 77

[truth]
class = "W"
c = 1.0
alpha = 0.0
beta = 1.0
j = 4096

[noise]
kind = "gaussian"
sigma = 0.3
"#;

#[test]
fn tail_condition_audit() {
    for kind in [NoiseKind::Gaussian, NoiseKind::Laplace, NoiseKind::Uniform] {
        let m = NoiseModel::new(kind, 0.3).unwrap();
        let mut rng = trial_rng(123, kind as u64);
        let draws: Vec<f64> = (0..1_000_000).map(|_| m.sample(&mut rng).abs()).collect();
        for mult in [1.0, 2.0, 3.0] {
            let x = mult * m.tail_scale();
            let freq = draws.iter().filter(|&&d| d > x).count() as f64 / draws.len() as f64;
            let bound = m.tail_bound(x);
            assert!(freq <= 1.5 * bound, "{kind:?} x = {mult}Q: {freq} > 1.5 * {bound}");
        }
    }
}

#[test]
fn gaussian_noise_variance() {
    let truth = make_truth(&ClassSpec::W { c: 1.0, alpha: 0.0, beta: 1.0 }, 64, Problem::Regression).unwrap();
    let noise = NoiseModel::new(NoiseKind::Gaussian, 0.3).unwrap();
    let n = 100_000;
    let s = simulate_regression(&truth, &noise, n, 5).unwrap();
    let f = truth.design_values(n);
    let resid: Vec<f64> = s.y().iter().zip(&f).map(|(y, f)| y - f).collect();
    let mean = resid.iter().sum::<f64>() / n as f64;
    let var = resid.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((var / 0.09 - 1.0).abs() <= 0.03, "variance {var}");
}

#[test]
fn regression_ratio_is_bounded() {
    let cfg = CampaignConfig::from_toml(W_REGRESSION).unwrap();
    let s = run_campaign(&cfg).unwrap().summary();
    let p95: Vec<f64> = s.per_n.iter().map(|x| x.ratio.p95).collect();
    println!("regression 95th percentile of ISE/B: {p95:?}");
    assert!(s.per_n[1].ratio.p95 <= 20.0);
    assert!(p95[2] <= p95[0]);
    let tau: Vec<f64> = s.per_n.iter().map(|x| x.median_tau_ratio_error).collect();
    assert!(tau[2] <= tau[0], "{tau:?}");
}

#[test]
fn density_ratio_is_bounded() {
    let text = r#"
problem = "density"
n = [512, 2048, 8192]
trials = 200
seed = 78

[truth]
class = "W"
c = 1.0
alpha = 0.0
beta = 1.0
j = 512
"#;
    let cfg = CampaignConfig::from_toml(text).unwrap();
    let c = run_campaign(&cfg).unwrap();
    assert!(c.records.iter().all(|r| r.outcome.is_ok()));
    let s = c.summary();
    let p95: Vec<f64> = s.per_n.iter().map(|x| x.ratio.p95).collect();
    println!("density 95th percentile of ISE/B: {p95:?} (shrink {})", s.truth_shrink);
    assert!(p95.iter().all(|&p| p <= 20.0));
    assert!(p95[2] <= p95[0]);
}

#[test]
fn calibrated_refined_interval_covers() {
    let delta = 0.1;
    let mut cfg = CampaignConfig::from_toml(W_REGRESSION).unwrap();
    cfg.confidence.delta = delta;
    cfg.confidence.interval = IntervalTag::Crude;
    let c_tail = calibrate_c_tail(&cfg, 2048, 300).unwrap();
    cfg.confidence.c_tail = c_tail;
    cfg.n = vec![2048];
    cfg.trials = 300;
    cfg.seed = 4242;
    let s = run_campaign(&cfg).unwrap().summary();
    let cov = s.per_n[0].refined_coverage;
    println!("calibrated c_tail {c_tail}, held-out coverage {cov}");
    assert!(cov >= 1.0 - delta - 0.07, "coverage {cov}");
}

#[test]
fn z_class_campaign_rate() {
    let text = r#"
problem = "regression"
n = [512, 8192]
trials = 50
seed = 79

[truth]
class = "Z"
alpha = 1.0
beta = 0.5
j = 200

[noise]
kind = "laplace"
sigma = 0.3
"#;
    let cfg = CampaignConfig::from_toml(text).unwrap();
    let s = run_campaign(&cfg).unwrap().summary();
    // Geometric decay: the risk tracks log(n)/n.
    for x in &s.per_n {
        let rate = (x.n as f64).ln() / x.n as f64;
        let r = x.ise.p50 / rate;
        assert!((0.05..=5.0).contains(&r), "n {}: median ISE / (log n / n) = {r}", x.n);
    }
    assert!(s.monotone.ise_decreasing);
}
