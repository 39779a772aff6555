#![allow(dead_code)]
use vix_mixed::*;
use vix_model::*;
use vix_single::QuadSpec;

pub fn flat() -> ForwardVarianceCurve<f64> {
    ForwardVarianceCurve::flat(0.0576).unwrap()
}

pub fn scenario(n: usize) -> MixedModel<f64> {
    let (ks, lam) = match n {
        1 => ([KernelSpec::exponential(10.0, 0.1), KernelSpec::exponential(2.0, 0.1)], 0.2),
        2 => ([KernelSpec::exponential(0.5, 0.1), KernelSpec::exponential(6.0, 0.1)], 0.3),
        3 => ([KernelSpec::power_law(1.4, 0.1), KernelSpec::power_law(0.7, 0.1)], 0.3),
        4 => ([KernelSpec::power_law(2.0, 0.1), KernelSpec::power_law(0.2, 0.1)], 0.4),
        _ => panic!("no scenario {n}"),
    };
    let [a, b] = ks;
    MixedModel::new([a.unwrap(), b.unwrap()], lam, flat()).unwrap()
}

pub fn inputs(n: usize, months: f64) -> MixedInputs {
    let c = VixContract::new(months / 12.0, 0.0);
    mixed_proxy(&scenario(n), &c, QuadSpec::default()).unwrap()
}

pub fn with_lambda(m: &MixedModel<f64>, lambda: f64) -> MixedModel<f64> {
    MixedModel::new(m.kernels, lambda, m.curve.clone()).unwrap()
}
