use vix_mathcore::{gauss_legendre, Scalar};
use vix_model::{KernelKind, WeightPiece};

use crate::Result;

/// Node counts for the t- and u-quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadSpec {
    pub t_nodes: usize,
    pub u_nodes: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            t_nodes: 120,
            u_nodes: 120,
        }
    }
}

impl QuadSpec {
    pub fn doubled(&self) -> Self {
        Self {
            t_nodes: 2 * self.t_nodes,
            u_nodes: 2 * self.u_nodes,
        }
    }
}

// Power-law integrands behave like (T-t)^(2H-1) and (u-T)^(2H); the map
// x = L * s^6 makes them smooth enough for Gauss-Legendre.
const POWER_MAP: i32 = 6;

/// Nodes on [0, T] stored as lags r = T - t, with weights.
pub(crate) fn time_lags<T: Scalar>(kind: KernelKind, t_end: T, n: usize) -> Result<(Vec<T>, Vec<T>)> {
    match kind {
        KernelKind::Exponential => {
            let r = gauss_legendre(n, T::zero(), t_end)?;
            Ok((r.nodes.iter().map(|&t| t_end - t).collect(), r.weights))
        }
        KernelKind::PowerLaw => mapped(n, t_end),
    }
}

fn mapped<T: Scalar>(n: usize, len: T) -> Result<(Vec<T>, Vec<T>)> {
    let r = gauss_legendre(n, T::zero(), T::one())?;
    let p = T::lit(f64::from(POWER_MAP));
    let x = r.nodes.iter().map(|&s| len * s.powi(POWER_MAP)).collect();
    let w = r
        .nodes
        .iter()
        .zip(&r.weights)
        .map(|(&s, &w)| len * p * s.powi(POWER_MAP - 1) * w)
        .collect();
    Ok((x, w))
}

/// Window nodes as offsets d = u - T, with weights already multiplied by
/// the normalised curve weight and divided by Delta (they sum to 1).
pub(crate) fn window_offsets<T: Scalar>(
    kind: KernelKind,
    t_mat: T,
    delta: T,
    pieces: &[WeightPiece<T>],
    n: usize,
) -> Result<(Vec<T>, Vec<T>)> {
    let mut d = Vec::new();
    let mut w = Vec::new();
    for p in pieces {
        let da = p.a - t_mat;
        let db = p.b - t_mat;
        let scale = p.weight / delta;
        if kind == KernelKind::PowerLaw && da <= T::zero() {
            let (x, wx) = mapped(n, db)?;
            d.extend(x);
            w.extend(wx.into_iter().map(|v| v * scale));
        } else {
            let r = gauss_legendre(n, da, db)?;
            d.extend(r.nodes);
            w.extend(r.weights.into_iter().map(|v| v * scale));
        }
    }
    Ok((d, w))
}
