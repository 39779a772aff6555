use proptest::prelude::*;
use vix_model::{AnyModel, ForwardVarianceCurve, KernelSpec, MixedModel, VixContract};
use vix_reference::{quad_price_exponential, Payoff, QuadNodes};

const XI: f64 = 0.0576;

fn mixture(om1: f64, om2: f64, kappa: f64, lam: f64) -> AnyModel {
    let k = [
        KernelSpec::exponential(om1, kappa).unwrap(),
        KernelSpec::exponential(om2, kappa).unwrap(),
    ];
    AnyModel::Mixed(MixedModel::new(k, lam, ForwardVarianceCurve::flat(XI).unwrap()).unwrap())
}

fn price(m: &AnyModel, t: f64, k: f64, p: Payoff) -> f64 {
    quad_price_exponential(m, &VixContract::new(t, k), p, QuadNodes::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parity_and_jensen(
        om1 in 0.5f64..8.0,
        om2 in 0.5f64..8.0,
        kappa in 0.1f64..5.0,
        lam in 0.0f64..=1.0,
        t in 0.02f64..0.5,
        strike in 0.12f64..0.4,
    ) {
        let m = mixture(om1, om2, kappa, lam);
        let k = strike.ln();
        let f = price(&m, t, 0.0, Payoff::Future);
        prop_assert!(f > 0.0 && f <= XI.sqrt() * (1.0 + 1e-10), "future {f}");
        let c = price(&m, t, k, Payoff::Call);
        let p = price(&m, t, k, Payoff::Put);
        prop_assert!((c - p - (f - strike)).abs() < 1e-8, "{c} {p} {f}");
    }

    #[test]
    fn calls_decrease_and_are_convex_in_strike(
        om in 0.5f64..6.0,
        kappa in 0.1f64..5.0,
        t in 0.02f64..0.5,
        strike in 0.14f64..0.34,
    ) {
        let m = mixture(om, om, kappa, 1.0);
        let h = 0.01;
        let [lo, mid, hi] = [strike - h, strike, strike + h].map(|s| price(&m, t, s.ln(), Payoff::Call));
        prop_assert!(lo >= mid && mid >= hi, "{lo} {mid} {hi}");
        prop_assert!(lo + hi - 2.0 * mid >= -1e-10, "{lo} {mid} {hi}");
    }
}
