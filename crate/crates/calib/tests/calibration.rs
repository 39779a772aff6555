use std::io::Write;
use std::time::Instant;

use vix_calib::*;
use vix_model::{ForwardVarianceCurve, KernelSpec, VixContract};
use vix_single::{kernel_proxy, proxy_prices, QuadSpec};

fn grid() -> Vec<f64> {
    (0..10).map(|i| -0.1 + 0.5 * i as f64 / 9.0).collect()
}

fn mixed(a: f64, b: f64, l: f64) -> Params {
    Params::Mixed {
        scale1: a,
        scale2: b,
        lambda: l,
    }
}

/// (scale_hi, scale_lo, weight of scale_hi) regardless of component labelling.
fn canonical(p: &Params) -> (f64, f64, f64) {
    match *p {
        Params::Mixed { scale1, scale2, lambda } if scale1 >= scale2 => (scale1, scale2, lambda),
        Params::Mixed { scale1, scale2, lambda } => (scale2, scale1, 1.0 - lambda),
        Params::Single { scale } => (scale, scale, 1.0),
    }
}

#[test]
fn chain_csv_grouping_and_policies() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "maturity_years,future,strike,iv").unwrap();
    for (t, fut) in [(0.25, 0.23), (1.0 / 12.0, 0.21), (1.0 / 6.0, 0.22), (1.0 / 3.0, 0.235)] {
        for s in [0.2, 0.25, 0.3] {
            writeln!(f, "{t},{fut},{s},0.9").unwrap();
        }
    }
    writeln!(f, "0.25,0.23,0.3,1.1").unwrap();
    f.flush().unwrap();
    let (chain, warnings) = load_chain(f.path()).unwrap();
    assert_eq!(chain.slices.len(), 4);
    assert!(chain.slices.windows(2).all(|w| w[0].t < w[1].t));
    assert_eq!(chain.quote_count(), 12);
    let s = chain.slices.iter().find(|s| s.t == 0.25).unwrap();
    assert_eq!(s.quotes.last().unwrap().iv, 1.1);
    assert!(warnings.iter().any(|w| w.contains("sorted")));
    assert!(warnings.iter().any(|w| w.contains("duplicate")));

    let mut buf = Vec::new();
    chain.to_csv(&mut buf).unwrap();
    let (again, w2) = parse_chain(buf.as_slice()).unwrap();
    assert_eq!(again, chain);
    assert!(w2.is_empty());
}

#[test]
fn chain_errors() {
    assert!(matches!(parse_chain("maturity_years,future,strike,iv\n".as_bytes()), Err(CalibError::EmptyChain)));
    let bad = "maturity_years,future,strike,iv\n0.1,0.2,0.2,0.8\n0.1,0.2,abc,0.8\n";
    match parse_chain(bad.as_bytes()) {
        Err(CalibError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    let neg = "maturity_years,future,strike,iv\n0.1,0.2,0.2,-0.8\n";
    assert!(matches!(parse_chain(neg.as_bytes()), Err(CalibError::Parse { line: 2, .. })));
}

#[test]
fn xi0_inverts_futures_exactly() {
    let cfg = CalibConfig::new(Family::Bergomi, 0.25);
    let xi = 0.0576;
    let t = 1.0 / 12.0;
    let c = VixContract::new(t, 0.0);
    let k = KernelSpec::exponential(2.0, 0.25).unwrap();
    let ki = kernel_proxy(&k, &ForwardVarianceCurve::flat(xi).unwrap(), &c, QuadSpec::default()).unwrap();
    let f = proxy_prices(&ki.proxy(t), &ki.gammas, &c).unwrap().future;
    let slice = MarketSlice { t, future: f, quotes: vec![] };
    let got = fit_xi0(&cfg, &Params::Single { scale: 2.0 }, &slice).unwrap();
    assert!((got - xi).abs() < 1e-10, "{got}");
}

#[test]
fn rough_table_fixture_round_trip() {
    let cfg = CalibConfig::new(Family::Rbergomi, 0.1);
    let p = Params::Single { scale: 0.891633 };
    let m = cfg.slice_model(&p, 1.0 / 12.0, cfg.order).unwrap();
    let f = m.future(0.052799);
    let slice = MarketSlice {
        t: 1.0 / 12.0,
        future: f,
        quotes: vec![],
    };
    let xi = fit_xi0(&cfg, &p, &slice).unwrap();
    assert!((xi - 0.052799).abs() < 1e-8, "{xi}");
}

#[test]
fn futures_increasing_in_xi0_for_every_family() {
    let cases = [
        (Family::Bergomi, 0.25, Params::Single { scale: 2.0 }),
        (Family::Rbergomi, 0.1, Params::Single { scale: 1.0 }),
        (Family::MixedBergomi, 0.1, mixed(10.0, 2.0, 0.2)),
        (Family::MixedRbergomi, 0.1, mixed(1.4, 0.7, 0.3)),
    ];
    for (fam, d, p) in cases {
        let cfg = CalibConfig::new(fam, d);
        let m = cfg.slice_model(&p, 0.25, cfg.order).unwrap();
        let f: Vec<f64> = (0..10).map(|i| m.future(1e-5 * (1e5f64).powf(i as f64 / 9.0))).collect();
        assert!(f.windows(2).all(|w| w[1] > w[0]), "{fam:?}: {f:?}");
    }
}

#[test]
fn unattainable_futures() {
    let cfg = CalibConfig::new(Family::Bergomi, 0.25);
    let p = Params::Single { scale: 2.0 };
    let s = MarketSlice {
        t: 0.25,
        future: 0.0005,
        quotes: vec![],
    };
    assert!(matches!(fit_xi0(&cfg, &p, &s), Err(CalibError::Data(_))));
    let s = MarketSlice { future: 1.5, ..s };
    assert!(matches!(fit_xi0(&cfg, &p, &s), Err(CalibError::FuturesUnattainable { .. })));
}

#[test]
fn single_round_trip() {
    let cfg = CalibConfig::new(Family::Bergomi, 0.25);
    let slice = synthetic_slice(&cfg, &Params::Single { scale: 2.0 }, 0.0576, 0.25, &grid()).unwrap();
    let r = calibrate_slice(&cfg, &slice, &Params::Single { scale: 0.5 }).unwrap();
    let Params::Single { scale } = r.params else { panic!() };
    assert!((scale / 2.0 - 1.0).abs() < 0.01, "{scale}");
    assert!((r.xi0 - 0.0576).abs() < 1e-6, "{}", r.xi0);
    assert!(r.converged && r.rmse < 1e-6, "{r:?}");
}

#[test]
fn mixed_round_trip() {
    let cfg = CalibConfig::new(Family::MixedRbergomi, 0.1);
    let slice = synthetic_slice(&cfg, &mixed(1.4, 0.7, 0.3), 0.0576, 1.0 / 12.0, &grid()).unwrap();
    let t0 = Instant::now();
    let r = calibrate_slice(&cfg, &slice, &mixed(1.0, 0.1, 0.5)).unwrap();
    let (a, b, l) = canonical(&r.params);
    assert!((r.xi0 - 0.0576).abs() < 1e-3, "{r:?}");
    assert!((a / 1.4 - 1.0).abs() < 0.05 && (b / 0.7 - 1.0).abs() < 0.05, "{r:?}");
    assert!((l - 0.3).abs() < 0.05, "{r:?}");
    assert!(t0.elapsed().as_secs_f64() < 120.0);
}

#[test]
fn term_structure_round_trip() {
    let cfg = CalibConfig::new(Family::MixedRbergomi, 0.1);
    let table = [
        (0.053519, 2.723135, 0.503698, 0.228369),
        (0.063174, 2.091913, 0.460136, 0.33932),
        (0.069393, 1.956434, 0.447115, 0.390033),
        (0.07242, 1.89242, 0.446803, 0.405827),
    ];
    let chain = MarketChain {
        slices: table
            .iter()
            .enumerate()
            .map(|(i, &(xi, a, b, l))| synthetic_slice(&cfg, &mixed(a, b, l), xi, (i + 1) as f64 / 12.0, &grid()).unwrap())
            .collect(),
    };
    let t0 = Instant::now();
    let warm = calibrate_term_structure(&cfg, &chain, &mixed(1.0, 0.1, 0.5)).unwrap();
    assert!(t0.elapsed().as_secs_f64() < 120.0);
    assert_eq!(warm.slices.len(), 4);
    for (s, &(xi, a, b, l)) in warm.slices.iter().zip(&table) {
        assert!(s.error.is_none(), "{s:?}");
        let (ga, gb, gl) = canonical(&s.params);
        assert!((s.xi0 - xi).abs() < 1e-3, "{s:?}");
        assert!((ga / a - 1.0).abs() < 0.05 && (gb / b - 1.0).abs() < 0.05 && (gl - l).abs() < 0.05, "{s:?}");
    }
    let curve = warm.xi0_curve();
    assert!(curve.windows(2).all(|w| w[1].1 > w[0].1), "{curve:?}");
    assert_eq!(curve[0].0, 0.0);

    let json = warm.to_json();
    let back: CalibResult = serde_json::from_str(&json).unwrap();
    assert_eq!(back.slices.len(), 4);

    // Cold starts reach the same fit.
    for (s, w) in chain.slices.iter().zip(&warm.slices) {
        let cold = calibrate_slice(&cfg, s, &mixed(1.0, 0.1, 0.5)).unwrap();
        assert!((cold.rmse - w.rmse).abs() < 1e-6, "{} vs {}", cold.rmse, w.rmse);
    }
}

#[test]
fn single_slice_chain_matches_slice_fit() {
    let cfg = CalibConfig::new(Family::Rbergomi, 0.1);
    let s = synthetic_slice(&cfg, &Params::Single { scale: 0.891633 }, 0.052799, 1.0 / 12.0, &grid()).unwrap();
    let chain = MarketChain { slices: vec![s.clone()] };
    let init = Params::Single { scale: 1.0 };
    let a = calibrate_term_structure(&cfg, &chain, &init).unwrap();
    let b = calibrate_slice(&cfg, &s, &init).unwrap();
    assert_eq!(a.slices[0], b);
    let Params::Single { scale } = b.params else { panic!() };
    assert!((scale / 0.891633 - 1.0).abs() < 1e-4 && (b.xi0 - 0.052799).abs() < 1e-6, "{b:?}");
}

#[test]
fn corner_start_does_not_panic() {
    let cfg = CalibConfig::new(Family::MixedBergomi, 1.0);
    let slice = synthetic_slice(&cfg, &mixed(9.8, 1.7, 0.25), 0.0556, 1.0 / 12.0, &grid()).unwrap();
    let b = cfg.bounds;
    for init in [mixed(b.scale.0, b.scale.0, b.lambda.0), mixed(b.scale.1, b.scale.1, b.lambda.1)] {
        match calibrate_slice(&cfg, &slice, &init) {
            Ok(r) => assert!(r.rmse.is_finite()),
            Err(e) => assert!(!e.to_string().is_empty()),
        }
    }
}

#[test]
fn steep_smile_defeats_single_kernel() {
    let gen = CalibConfig::new(Family::MixedRbergomi, 0.1);
    let slice = synthetic_slice(&gen, &mixed(2.723135, 0.503698, 0.228369), 0.053519, 1.0 / 12.0, &grid()).unwrap();
    let cfg = CalibConfig::new(Family::Rbergomi, 0.1);
    let r = calibrate_slice(&cfg, &slice, &Params::Single { scale: 1.0 }).unwrap();
    let skew = slice.quotes.last().unwrap().iv - slice.quotes[0].iv;
    assert!(skew > 0.2, "{skew}");
    assert!(r.rmse > 0.05, "{r:?}");
}

#[test]
fn bad_inputs() {
    let cfg = CalibConfig::new(Family::Bergomi, 0.25);
    let s = MarketSlice {
        t: 0.25,
        future: 0.23,
        quotes: vec![Quote { strike: 0.2, iv: 0.8 }; 2],
    };
    assert!(matches!(calibrate_slice(&cfg, &s, &Params::Single { scale: 1.0 }), Err(CalibError::Data(_))));
    let s3 = MarketSlice {
        quotes: vec![Quote { strike: 0.2, iv: 0.8 }; 3],
        ..s
    };
    assert!(matches!(calibrate_slice(&cfg, &s3, &mixed(1.0, 1.0, 0.5)), Err(CalibError::Config(_))));
    assert!(matches!(calibrate_slice(&cfg, &s3, &Params::Single { scale: 50.0 }), Err(CalibError::Config(_))));
    assert!(matches!(
        calibrate_term_structure(&cfg, &MarketChain::default(), &Params::Single { scale: 1.0 }),
        Err(CalibError::EmptyChain)
    ));
}

#[test]
fn accepted_steps_never_increase_cost() {
    struct P<'a>(&'a SliceModel, &'a MarketSlice);
    impl Residuals for P<'_> {
        type Ctx = ();
        type Error = CalibError;
        fn context(&self, _: &[f64]) -> Result<()> {
            Ok(())
        }
        fn eval(&self, x: &[f64], _: &()) -> Result<Vec<f64>> {
            // Fit xi0 only, through the IVs.
            let iv: Vec<f64> = self.1.log_strikes().iter().map(|&k| self.0.iv(k, x[0])).collect::<Result<_>>()?;
            Ok(iv.iter().zip(self.1.ivs()).map(|(a, b)| a - b).collect())
        }
    }
    let cfg = CalibConfig::new(Family::MixedBergomi, 0.1);
    let p = mixed(10.0, 2.0, 0.2);
    let slice = synthetic_slice(&cfg, &p, 0.0576, 0.25, &grid()).unwrap();
    let m = cfg.slice_model(&p, 0.25, cfg.order).unwrap();
    let rep = least_squares(&P(&m, &slice), &[0.2], &[1e-5], &[1.0], LmOptions::default()).unwrap();
    assert!(!rep.accepted.is_empty());
    assert!(rep.accepted.iter().all(|(a, b)| b <= a));
    assert!((rep.x[0] - 0.0576).abs() < 1e-6, "{:?}", rep.x);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn xi0_scaling_round_trip(xi in 1e-4f64..0.9, x in -0.2f64..0.5, omega in 0.5f64..5.0) {
            let cfg = CalibConfig::new(Family::Bergomi, 0.5);
            let p = Params::Single { scale: omega };
            let m = cfg.slice_model(&p, 0.25, cfg.order).unwrap();
            let f = m.future(xi);
            prop_assume!(f > 0.011 && f < 1.99);
            let back = m.fit_xi0(f, cfg.bounds.xi0).unwrap();
            prop_assert!((back / xi - 1.0).abs() < 1e-12);
            // IV depends on the strike only through log-moneyness.
            let a = m.iv(f.ln() + x, xi).unwrap();
            let b = m.iv(m.future(1.0).ln() + x, 1.0).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
