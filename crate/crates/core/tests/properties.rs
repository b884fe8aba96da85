use legadapt_core::confidence::{aci_radius, gamma_hat, BlockSize};
use legadapt_core::estimators::{
    design_point, estimate_coeffs_density, estimate_coeffs_regression, fit_adaptive, fit_projection, full_j_max,
    ise_parseval, tau_scan, DensitySample, Problem, RegressionSample, TauScan,
};
use legadapt_core::legendre::{cd_kernel, legendre_l};
use legadapt_core::quadrature::gauss_legendre_rule;
use legadapt_core::truth::{make_truth, quadrature_coeffs, ClassSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn density_sample() -> impl Strategy<Value = Vec<f64>> {
    (16usize..300).prop_flat_map(|n| prop::collection::vec(-1.0f64..=1.0, n))
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn density_fits_integrate_to_one(xi in density_sample(), frac in 0.0f64..=1.0) {
        let n = xi.len();
        let s = DensitySample::new(xi).unwrap();
        let table = estimate_coeffs_density(&s, full_j_max(n)).unwrap();
        let big_n = (frac * table.j_max() as f64) as usize;
        let fit = fit_projection(&table, big_n).unwrap();
        prop_assert!((fit.integral() - 1.0).abs() <= 1e-12);
        let rule = gauss_legendre_rule(big_n / 2 + 2).unwrap();
        let by_quadrature = rule.integrate(|x| fit.evaluate(x));
        prop_assert!((by_quadrature - 1.0).abs() <= 1e-10, "{}", by_quadrature);
    }

    #[test]
    fn scan_and_selection_agree(xi in density_sample()) {
        let s = DensitySample::new(xi).unwrap();
        let (fit, scan) = fit_adaptive(&s).unwrap();
        prop_assert_eq!(scan.tau(scan.n_selected()), scan.tau_star());
        prop_assert_eq!(fit.n_selected(), scan.n_selected());
        prop_assert!(scan.values().iter().all(|&t| t >= scan.tau_star()));
        prop_assert!(scan.iter().skip(scan.n_selected()).all(|(_, t)| t > scan.tau_star()));
    }

    #[test]
    fn fits_are_bit_identical(y in (16usize..400).prop_flat_map(|n| prop::collection::vec(-5.0f64..5.0, n))) {
        let a = RegressionSample::new(y.clone()).unwrap();
        let b = RegressionSample::new(y).unwrap();
        let (fa, sa) = fit_adaptive(&a).unwrap();
        let (fb, sb) = fit_adaptive(&b).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(sa.values()), bits(sb.values()));
        prop_assert_eq!(bits(fa.coeffs()), bits(fb.coeffs()));
    }

    #[test]
    fn power_of_two_scaling_is_exact(
        y in (16usize..400).prop_flat_map(|n| prop::collection::vec(-5.0f64..5.0, n)),
        e in -8i32..8,
    ) {
        let a = 2f64.powi(e);
        let base = RegressionSample::new(y.clone()).unwrap();
        let scaled = RegressionSample::new(y.iter().map(|v| v * a).collect()).unwrap();
        let (fb, sb) = fit_adaptive(&base).unwrap();
        let (fs, ss) = fit_adaptive(&scaled).unwrap();
        prop_assert_eq!(sb.n_selected(), ss.n_selected());
        for (u, v) in fb.coeffs().iter().zip(fs.coeffs()) {
            prop_assert_eq!(u * a, *v);
        }
        for (u, v) in sb.values().iter().zip(ss.values()) {
            prop_assert_eq!(u * a * a, *v);
        }
    }

    #[test]
    fn tie_rule(tau in prop::collection::vec(0.0f64..10.0, 3..60), bump in 0.1f64..5.0, pick in any::<prop::sample::Index>()) {
        let n = 3 * tau.len();
        let scan = TauScan::from_values(n, tau.clone()).unwrap();
        let sel = scan.n_selected();
        // Perturbing a non-minimal entry keeps the selection.
        let i = pick.index(tau.len());
        if tau[i] > scan.tau_star() {
            let mut t = tau.clone();
            t[i] += bump;
            prop_assert_eq!(TauScan::from_values(n, t).unwrap().n_selected(), sel);
        }
        // Copying the minimum to a larger N moves the selection there.
        if sel < tau.len() {
            let j = sel + pick.index(tau.len() - sel);
            let mut t = tau.clone();
            t[j] = scan.tau_star();
            let moved = TauScan::from_values(n, t).unwrap();
            prop_assert!(moved.n_selected() > sel);
            prop_assert!(moved.n_selected() > j);
        }
    }

    #[test]
    fn gamma_invariant_under_noise_floor(a in 0.01f64..1.0, g in 0.05f64..0.9, s in 0.0f64..3.0, m in 1usize..6) {
        // tau(N) = a g^{log2 N} + s N is shifted by a pure noise floor; the
        // estimator differences it away.
        let max_n = 4 * m;
        let tau: Vec<f64> = (1..=max_n)
            .map(|k| a * g.powf((k as f64).log2()) + s * k as f64)
            .collect();
        let scan = TauScan::from_values(3 * max_n, tau).unwrap();
        let est = gamma_hat(&scan, m).unwrap();
        prop_assert!((est - g).abs() <= 1e-9 * (1.0 + s / a), "{} vs {}", est, g);
    }

    #[test]
    fn radius_identity(a in 0.01f64..1.0, g in 0.05f64..0.9, m in 1usize..6) {
        let max_n = 4 * m;
        let tau: Vec<f64> = (1..=max_n).map(|k| a * g.powf((k as f64).log2())).collect();
        let scan = TauScan::from_values(3 * max_n, tau).unwrap();
        let report = aci_radius(&scan, BlockSize::exact(m));
        let r = report.radius.unwrap();
        prop_assert!((r * (1.0 - g) - scan.tau_star()).abs() <= 1e-12 * scan.tau_star().max(1e-300));
    }

    #[test]
    fn cd_kernel_matches_sum(k in 0usize..=128, x in -1.0f64..=1.0, y in -1.0f64..=1.0) {
        let direct: f64 = (0..=k).map(|m| legendre_l(m, x) * legendre_l(m, y)).sum();
        let scale: f64 = (0..=k).map(|m| (legendre_l(m, x) * legendre_l(m, y)).abs()).sum::<f64>().max(1.0);
        prop_assert!((cd_kernel(k, x, y) - direct).abs() <= 1e-10 * scale);
    }

    #[test]
    fn cd_kernel_near_diagonal(k in 0usize..=128, x in -1.0f64..=1.0, h in -1e-6f64..1e-6) {
        let y = (x + h).clamp(-1.0, 1.0);
        let direct: f64 = (0..=k).map(|m| legendre_l(m, x) * legendre_l(m, y)).sum();
        prop_assert!((cd_kernel(k, x, y) - direct).abs() <= 1e-9 * direct.abs().max(1.0));
    }

    #[test]
    fn parseval_closure(beta in 0.55f64..3.0, c in 0.1f64..5.0, zb in 0.05f64..0.95) {
        for spec in [ClassSpec::W { c, alpha: 0.0, beta }, ClassSpec::Z { alpha: c, beta: zb }] {
            let m = make_truth(&spec, 200, Problem::Regression).unwrap();
            let head: f64 = m.coeffs()[1..].iter().map(|v| v * v).sum();
            prop_assert!((head + m.tail() - m.rho(0)).abs() <= 1e-12);
        }
    }
}

#[test]
fn riemann_error_is_first_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let d = rng.random_range(1..=20usize);
        let poly: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let exact = quadrature_coeffs(|x| poly_eval(&poly, x), 40).unwrap();
        let err = |n: usize| -> f64 {
            let y = (1..=n).map(|i| poly_eval(&poly, design_point(n, i))).collect();
            let t = estimate_coeffs_regression(&RegressionSample::new(y).unwrap(), 40).unwrap();
            t.coeffs().iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let k = 512.0 * err(512);
        let mut prev = err(512);
        for n in [1024usize, 2048, 4096] {
            let e = err(n);
            let ratio = prev / e;
            assert!((2.0 / 1.5..=2.0 * 1.5).contains(&ratio), "deg {d} n {n}: ratio {ratio}");
            prev = e;
        }
        assert!(prev <= 1.5 * k / 4096.0);
    }
}

#[test]
fn ise_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rule = gauss_legendre_rule(2000).unwrap();
    for _ in 0..20 {
        let jt = rng.random_range(0..40usize);
        let truth: Vec<f64> = (0..=jt).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = 300;
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let table = estimate_coeffs_regression(&RegressionSample::new(y).unwrap(), 60).unwrap();
        let fit = fit_projection(&table, rng.random_range(0..=jt)).unwrap();
        let f = |x: f64| -> f64 { truth.iter().enumerate().map(|(j, c)| c * legendre_l(j, x)).sum() };
        let by_quadrature = rule.integrate(|x| (fit.evaluate(x) - f(x)).powi(2));
        let by_parseval = ise_parseval(&fit, &truth, 0.0).unwrap();
        assert!((by_quadrature - by_parseval).abs() <= 1e-8, "{by_quadrature} vs {by_parseval}");
    }
}

#[test]
fn regression_scan_reuses_table() {
    let n = 999;
    let y: Vec<f64> = (1..=n).map(|i| (3.0 * design_point(n, i)).sin()).collect();
    let s = RegressionSample::new(y).unwrap();
    let table = estimate_coeffs_regression(&s, full_j_max(n)).unwrap();
    let (fit, scan) = fit_adaptive(&s).unwrap();
    assert_eq!(scan, tau_scan(&table).unwrap());
    assert_eq!(fit.coeffs(), &table.coeffs()[..=scan.n_selected()]);
}
