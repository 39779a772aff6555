use vix_model::{AnyModel, ForwardVarianceCurve, KernelKind, KernelSpec};

/// One weighted kernel of a (possibly single) mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub kernel: KernelSpec<f64>,
}

/// Components with positive weight, and the shared curve.
///
/// A single-kernel model is the one-component mixture with weight 1, so both
/// go through the same arithmetic.
pub fn components(m: &AnyModel) -> (Vec<Component>, &ForwardVarianceCurve<f64>) {
    let list = match m {
        AnyModel::Single(s) => vec![Component {
            weight: 1.0,
            kernel: s.kernel,
        }],
        AnyModel::Mixed(mm) => mm
            .weights()
            .iter()
            .zip(mm.kernels.iter())
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, k)| Component { weight: *w, kernel: *k })
            .collect(),
    };
    (list, m.curve())
}

pub(crate) fn kind_of(m: &AnyModel) -> KernelKind {
    m.kernel_kind()
}
