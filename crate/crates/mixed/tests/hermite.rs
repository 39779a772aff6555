mod common;

use common::*;
use proptest::prelude::*;
use vix_blackscholes::d1_d2;
use vix_blackscholes::BsInputs;
use vix_mixed::*;
use vix_model::VixContract;
use vix_single::{gamma_coeffs, proxy_params, proxy_prices, GammaCoefficients, QuadSpec};

fn sf(x: f64) -> f64 {
    x.abs().max(1e-12)
}

#[test]
fn single_component_weights_are_trivial() {
    let mut p = inputs(1, 1.0).params;
    p.lambda = [1.0, 0.0];
    let b = HermiteBasis::new(&p, 6).unwrap();
    let w = b.weights(Component::First).unwrap();
    assert!((w[0][0] - 1.0).abs() < 1e-14);
    for n in 1..=6 {
        assert!(w[0][n].abs() < 1e-14);
    }
    for i in 1..4 {
        assert!(w[i].iter().all(|x| *x == 0.0));
    }
    assert!(b.weights(Component::Second).is_err());
    assert_eq!(optimal_order(&p, Component::First, 25).unwrap(), 1);
}

#[test]
fn derivative_weights_match_finite_differences() {
    for n in [1, 3, 4] {
        let p = inputs(n, 3.0).params;
        let order = 8;
        let h = 1e-4;
        for j in [Component::First, Component::Second] {
            let b = HermiteBasis::new(&p, order).unwrap();
            let w = b.weights(j).unwrap();
            let at = |d1: f64, d2: f64, i: usize| HermiteBasis::new(&p.shifted(d1, d2), order).unwrap().weights(j).unwrap()[i].clone();
            for i in 0..3 {
                let up = at(h, 0.0, i);
                let dn = at(-h, 0.0, i);
                let up2 = at(0.0, h, i);
                let dn2 = at(0.0, -h, i);
                for m in 0..=order {
                    let d_mu1 = (up[m] - dn[m]) / (2.0 * h);
                    let d_mu2 = (up2[m] - dn2[m]) / (2.0 * h);
                    assert!((d_mu1 - w[i + 1][m]).abs() < 1e-6 * sf(w[i + 1][m]).max(1e-3), "S{n} {j:?} i={i} n={m}");
                    assert!((d_mu1 + d_mu2).abs() < 1e-6 * sf(d_mu1).max(1e-3));
                }
            }
        }
    }
}

#[test]
fn reconstruction_error_decreases() {
    let p = inputs(1, 1.0).params;
    for j in [Component::First, Component::Second] {
        let mse = order_mse(&p, j, 25).unwrap();
        for n in 1..mse.len() {
            assert!(mse[n] <= mse[n - 1] + 1e-14, "{j:?} n={n}");
        }
        assert!(mse[25] < 1e-3 * mse[0]);
    }
}

#[test]
fn weight_quadrature_self_convergence() {
    for n in 1..=4 {
        let p = inputs(n, 3.0).params;
        let b = HermiteBasis::new(&p, 18).unwrap();
        for j in [Component::First, Component::Second] {
            let a = b.weights(j).unwrap();
            // The basis itself compares 400 against 800 nodes at the top order.
            assert!(a.iter().all(|wi| wi.iter().all(|x| x.is_finite())));
        }
    }
    assert!(matches!(HermiteBasis::new(&inputs(1, 1.0).params, 26), Err(MixedError::OrderTooHigh { .. })));
}

#[test]
fn optimal_orders_near_tables() {
    let cases = [(1, [10, 16, 18], 3), (3, [4, 4, 5], 2)];
    for (s, want, tol) in cases {
        for (months, w) in [1.0, 3.0, 6.0].iter().zip(want) {
            let p = inputs(s, *months).params;
            let n = optimal_order(&p, p.default_component(), 25).unwrap() as i64;
            assert!((n - w as i64).abs() <= tol, "S{s} {months}m: N={n}, table {w}");
        }
    }
}

#[test]
fn c_coefficient_structure() {
    let mut p = inputs(3, 1.0).params;
    let g = [GammaCoefficients::new(0.03, -0.02, 0.01), GammaCoefficients::new(0.02, -0.01, 0.004)];
    let c = c_coeffs(&g, &p).unwrap();
    assert_eq!(c[0][3], c[1][3]);
    p.sigma[1] = p.sigma[0];
    let c = c_coeffs(&g, &p).unwrap();
    assert_eq!([c[0][2], c[0][3], c[1][2], c[1][3]], [0.0; 4]);
    let want = 0.03 - 0.01 + 0.01 / 4.0 - (0.02 - 0.005 + 0.001);
    assert!((c[0][1] - want).abs() < 1e-15);
    let c = c_coeffs(&[GammaCoefficients::zero(); 2], &inputs(1, 1.0).params).unwrap();
    assert_eq!(c, [[1.0, 0.0, 0.0, 0.0]; 2]);
}

#[test]
fn futures_consistent_across_components() {
    for n in 1..=4 {
        let inp = inputs(n, 3.0);
        let b = HermiteBasis::new(&inp.params, 10).unwrap();
        let f1 = b.form(Component::First).unwrap().ln_pre.exp() * b.weights(Component::First).unwrap()[0][0];
        let f2 = b.form(Component::Second).unwrap().ln_pre.exp() * b.weights(Component::Second).unwrap()[0][0];
        assert!((f1 / f2 - 1.0).abs() < 1e-9, "S{n}: {f1} {f2}");
    }
}

#[test]
fn hermite_lambda_one_matches_single() {
    let m = with_lambda(&scenario(1), 1.0);
    let c = VixContract::new(1.0 / 12.0, 0.25f64.ln());
    let inp = mixed_proxy(&m, &c, QuadSpec::default()).unwrap();
    let s = m.component(0);
    let want = proxy_prices(
        &proxy_params(&s, &c, QuadSpec::default()).unwrap(),
        &gamma_coeffs(&s, &c, QuadSpec::default()).unwrap(),
        &c,
    )
    .unwrap();
    let want0 = proxy_prices(&proxy_params(&s, &c, QuadSpec::default()).unwrap(), &GammaCoefficients::zero(), &c).unwrap();
    let frozen = weak_approx_price(&inp, c.k, Payoff::Call, WeakOptions { freeze_root: true, ..Default::default() }).unwrap();
    for n in [1, 5, 12] {
        let layer = hermite_weights(&inp, c.k, n).unwrap();
        let hp = hermite_prices(&layer, &inp.params, Component::First).unwrap();
        assert!((hp.future - want.future).abs() < 1e-8);
        assert!((hp.call0 - want0.call).abs() < 1e-12);
        // The Hermite correction differentiates with the root held fixed.
        assert!((hp.call - frozen.price).abs() < 1e-9, "N={n}: {} vs {}", hp.call, frozen.price);
    }
}

#[test]
fn hermite_corrections_match_frozen_root_operator() {
    let k = 0.24f64.ln();
    for (s, months) in [(3, 1.0), (3, 3.0), (3, 6.0), (4, 1.0)] {
        let inp = inputs(s, months);
        let layer = hermite_weights(&inp, k, 25).unwrap();
        let fd = weak_approx_price(&inp, k, Payoff::Call, WeakOptions { freeze_root: true, ..Default::default() }).unwrap();
        for j in [Component::First, Component::Second] {
            let hp = hermite_prices(&layer, &inp.params, j).unwrap();
            let corr = hp.call - hp.call0;
            assert!((corr / fd.correction - 1.0).abs() < 1e-4, "S{s} {months}m {j:?}: {corr} vs {}", fd.correction);
        }
    }
}

#[test]
fn theta_pins_d2() {
    for s in 1..=4 {
        let inp = inputs(s, 3.0);
        for k in [0.15f64.ln(), 0.3f64.ln()] {
            let layer = hermite_weights(&inp, k, 8).unwrap();
            for j in [Component::First, Component::Second] {
                let f = hermite_prices(&layer, &inp.params, j).unwrap().future;
                let th = theta_and_coords(&layer, &inp.params, j, f);
                assert_eq!(th.theta, if th.delta > 0.0 { 1.0 } else { 0.0 });
                let st = inp.params.sigma_tilde(j);
                let mut best = f64::NEG_INFINITY;
                for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
                    let c = th.with_theta(t);
                    let (d1, d2) = d1_d2(&BsInputs::new(c.x_theta, c.k_theta, st / 2.0, inp.params.t)).unwrap();
                    assert!((d2 + layer.root).abs() < 1e-12);
                    assert!((d1 + layer.root - st * inp.params.t.sqrt() / 2.0).abs() < 1e-12);
                    best = best.max(c.x_theta);
                }
                assert_eq!(best, th.x_theta);
            }
        }
    }
}

#[test]
fn theta_zero_shift() {
    let inp = inputs(3, 1.0);
    let layer = hermite_weights(&inp, 0.2f64.ln(), 4).unwrap();
    let j = Component::Second;
    let s = inp.params.sigma[1];
    let lnf = layer.k - layer.root * s / 2.0 + s * s / 8.0;
    let th = theta_and_coords(&layer, &inp.params, j, lnf.exp());
    assert!(th.delta.abs() < 1e-15);
    for t in [0.0, 0.5, 1.0] {
        let c = th.with_theta(t);
        assert!((c.x_theta - lnf).abs() < 1e-15 && (c.k_theta - layer.k).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hermite_parity(s in 1usize..=4, mi in 0usize..3, order in 1usize..=20, ek in 0.1f64..0.4, second in any::<bool>()) {
        let inp = inputs(s, [1.0, 3.0, 6.0][mi]);
        let k = ek.ln();
        let layer = hermite_weights(&inp, k, order).unwrap();
        let j = if second { Component::Second } else { Component::First };
        let hp = hermite_prices(&layer, &inp.params, j).unwrap();
        prop_assert!(((hp.call - hp.put) - (hp.future - ek)).abs() < 1e-10);
    }
}
