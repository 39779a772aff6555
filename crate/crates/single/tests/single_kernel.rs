use approx::assert_relative_eq;
use proptest::prelude::*;
use vix_model::{ForwardVarianceCurve, KernelSpec, SingleModel, VixContract};
use vix_single::*;

fn flat() -> ForwardVarianceCurve<f64> {
    ForwardVarianceCurve::flat(0.0576).unwrap()
}

fn bergomi() -> SingleModel<f64> {
    SingleModel::new(KernelSpec::exponential(2.0, 0.25).unwrap(), flat()).unwrap()
}

fn rough() -> SingleModel<f64> {
    SingleModel::new(KernelSpec::power_law(1.0, 0.1).unwrap(), flat()).unwrap()
}

#[test]
fn gammas_match_independent_values() {
    let c = VixContract::new(1.0 / 12.0, 0.0);
    let g = gamma_coeffs(&bergomi(), &c, QuadSpec::default()).unwrap();
    assert_relative_eq!(g.gamma1, 7.426904526047489e-06, max_relative = 1e-8);
    assert_relative_eq!(g.gamma2, -3.599724175342669e-06, max_relative = 1e-8);
    assert_relative_eq!(g.gamma3, 1.7998240920021267e-06, max_relative = 1e-8);
    let big = gamma_coeffs(&bergomi(), &c, QuadSpec { t_nodes: 480, u_nodes: 480 }).unwrap();
    assert_relative_eq!(g.gamma1, big.gamma1, max_relative = 1e-8);
    assert_relative_eq!(g.gamma2, big.gamma2, max_relative = 1e-8);
    assert_relative_eq!(g.gamma3, big.gamma3, max_relative = 1e-8);

    let g = gamma_coeffs(&rough(), &c, QuadSpec::default()).unwrap();
    assert_relative_eq!(g.gamma1, 0.0279283642000919, max_relative = 1e-7);
    assert_relative_eq!(g.gamma2, -0.01986601652659866, max_relative = 1e-7);
    assert_relative_eq!(g.gamma3, 0.008555175330227574, max_relative = 1e-7);
}

#[test]
fn rough_proxy_self_converges() {
    let c = VixContract::new(1.0 / 12.0, 0.0);
    let a = proxy_params(&rough(), &c, QuadSpec::default()).unwrap();
    let b = proxy_params(&rough(), &c, QuadSpec::default().doubled()).unwrap();
    assert!((a.sigma_p - b.sigma_p).abs() < 1e-8);
    assert!((a.mu_p - b.mu_p).abs() < 1e-8);
    assert_relative_eq!(a.mu_p, -3.2332426012097004, max_relative = 1e-9);
    assert_relative_eq!(a.sigma_p, 0.851983660660055, max_relative = 1e-9);
    let ga = gamma_coeffs(&rough(), &c, QuadSpec::default()).unwrap();
    let gb = gamma_coeffs(&rough(), &c, QuadSpec::default().doubled()).unwrap();
    for (x, y) in ga.as_array().iter().zip(gb.as_array()) {
        assert!((x - y).abs() < 1e-8 * y.abs().max(1e-3));
    }
}

#[test]
fn degenerate_limits() {
    let c = VixContract::new(1e-9, 0.0);
    let p = proxy_params(&bergomi(), &c, QuadSpec::default()).unwrap();
    assert!(p.sigma_p < 1e-4);
    assert_relative_eq!(p.mu_p, 0.0576f64.ln(), max_relative = 1e-6);
    let g = gamma_coeffs(&rough(), &c, QuadSpec::default()).unwrap();
    assert!(g.gamma1.abs() < 1e-3 && g.gamma2.abs() < 1e-3 && g.gamma3.abs() < 1e-3);

    let c = VixContract::with_delta(0.25, 1e-5, 0.0).unwrap();
    let g = gamma_coeffs(&bergomi(), &c, QuadSpec::default()).unwrap();
    assert!(g.gamma1.abs() < 1e-6 && g.gamma2.abs() < 1e-6 && g.gamma3.abs() < 1e-6, "{g:?}");

    // Rough kernels vanish only at the rate Delta^(2H).
    let g5 = gamma_coeffs(&rough(), &c, QuadSpec::default()).unwrap();
    let g7 = gamma_coeffs(&rough(), &VixContract::with_delta(0.25, 1e-7, 0.0).unwrap(), QuadSpec::default()).unwrap();
    let rate = |a: f64, b: f64| (a / b).ln() / 100f64.ln();
    assert!((rate(g5.gamma1, g7.gamma1) - 0.2).abs() < 0.05);
    assert!((rate(g5.gamma3, g7.gamma3) - 0.4).abs() < 0.05);
    assert!(g7.gamma1 < g5.gamma1 && g7.gamma3 < g5.gamma3);
}

#[test]
fn prices_without_corrections() {
    let c = VixContract::new(0.25, 0.2f64.ln());
    let p = proxy_params(&bergomi(), &c, QuadSpec::default()).unwrap();
    let pr = proxy_prices(&p, &GammaCoefficients::zero(), &c).unwrap();
    assert_eq!(pr.call, pr.call0);
    assert_eq!(pr.future, p.x_p.exp());
    let t0 = VixContract::new(1e-10, 0.0);
    let p0 = proxy_params(&bergomi(), &t0, QuadSpec::default()).unwrap();
    assert!((p0.x_p.exp() - 0.24).abs() < 1e-6);
}

#[test]
fn iv_expansion_examples() {
    let c = VixContract::new(1.0 / 12.0, 0.24f64.ln());
    let m = bergomi();
    let p = proxy_params(&m, &c, QuadSpec::default()).unwrap();
    let g = gamma_coeffs(&m, &c, QuadSpec::default()).unwrap();
    assert_relative_eq!(iv_expansion(&p, &g, &c).unwrap(), 0.9795690924458835, max_relative = 1e-9);
    assert_eq!(iv_expansion(&p, &GammaCoefficients::zero(), &c).unwrap(), p.sigma_tilde / 2.0);
}

#[test]
fn f32_path_agrees() {
    let c32 = VixContract::new(0.25f32, 0.0);
    let m32 = SingleModel::new(KernelSpec::exponential(2.0f32, 0.25).unwrap(), ForwardVarianceCurve::flat(0.0576f32).unwrap()).unwrap();
    let p32: ProxyParams32 = proxy_params(&m32, &c32, QuadSpec { t_nodes: 40, u_nodes: 40 }).unwrap();
    let p64 = proxy_params(&bergomi(), &VixContract::new(0.25, 0.0), QuadSpec::default()).unwrap();
    assert!((f64::from(p32.sigma_p) - p64.sigma_p).abs() < 1e-5);
}

fn model_strategy() -> impl Strategy<Value = SingleModel<f64>> {
    prop_oneof![
        (0.2f64..10.0, 0.05f64..10.0).prop_map(|(o, k)| SingleModel::new(KernelSpec::exponential(o, k).unwrap(), flat()).unwrap()),
        (0.2f64..2.0, 0.05f64..0.45).prop_map(|(e, h)| SingleModel::new(KernelSpec::power_law(e, h).unwrap(), flat()).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gammas_one_and_three_nonnegative(m in model_strategy(), t in 0.02f64..1.0) {
        let c = VixContract::new(t, 0.0);
        let g = gamma_coeffs(&m, &c, QuadSpec { t_nodes: 60, u_nodes: 60 }).unwrap();
        prop_assert!(g.gamma1 >= 0.0);
        prop_assert!(g.gamma3 >= 0.0);
        prop_assert!((g.delta_sum - (g.gamma1 / 2.0 + g.gamma2 / 4.0 + g.gamma3 / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn proxy_fields_consistent(m in model_strategy(), t in 0.02f64..1.0) {
        let p = proxy_params(&m, &VixContract::new(t, 0.0), QuadSpec { t_nodes: 60, u_nodes: 60 }).unwrap();
        prop_assert!(p.is_consistent(1e-14));
    }

    #[test]
    fn corrected_parity(m in model_strategy(), t in 0.02f64..1.0, lk in -2.0f64..-0.8) {
        let c = VixContract::new(t, lk);
        let q = QuadSpec { t_nodes: 60, u_nodes: 60 };
        let p = proxy_params(&m, &c, q).unwrap();
        let g = gamma_coeffs(&m, &c, q).unwrap();
        let pr = proxy_prices(&p, &g, &c).unwrap();
        prop_assert!(((pr.call - pr.put) - (pr.future - lk.exp())).abs() < 1e-12);
    }

    #[test]
    fn iv_affine_in_strike(m in model_strategy(), t in 0.02f64..1.0, k1 in -2.0f64..-0.8, dk in 0.01f64..0.5) {
        let q = QuadSpec { t_nodes: 60, u_nodes: 60 };
        let c1 = VixContract::new(t, k1);
        let c2 = c1.with_strike(k1 + dk);
        let p = proxy_params(&m, &c1, q).unwrap();
        let g = gamma_coeffs(&m, &c1, q).unwrap();
        let slope = (iv_expansion(&p, &g, &c2).unwrap() - iv_expansion(&p, &g, &c1).unwrap()) / dk;
        let want = g.gamma3 / (p.sigma_tilde.powi(3) * t * t);
        prop_assert!((slope - want).abs() <= 1e-8 * want.abs().max(1.0));
    }

    #[test]
    fn step_curve_weights_sum(lo in 0.01f64..0.2, hi in 0.01f64..0.2, t in 0.05f64..0.5) {
        let cur = ForwardVarianceCurve::new(vec![(0.0, lo), (t + 0.03, hi)]).unwrap();
        let m = SingleModel::new(KernelSpec::power_law(1.0, 0.1).unwrap(), cur).unwrap();
        let c = VixContract::new(t, 0.0);
        let a = proxy_params(&m, &c, QuadSpec::default()).unwrap();
        let b = proxy_params(&m, &c, QuadSpec::default().doubled()).unwrap();
        prop_assert!((a.sigma_p - b.sigma_p).abs() < 1e-8);
    }
}
