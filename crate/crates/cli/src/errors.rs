use serde::Serialize;

use crate::methods::{Method, SmilePoint};

/// Signed relative IV error of one method at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRow {
    pub k: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub log_moneyness: f64,
    pub method: Method,
    pub iv: f64,
    pub iv_baseline: f64,
    /// (iv - iv_baseline) / iv_baseline; NaN when either side is flagged.
    pub rel_error: f64,
    pub flag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorSummary {
    pub method: Method,
    #[serde(rename = "T")]
    pub t: f64,
    pub points: usize,
    pub nan_points: usize,
    pub max_abs: f64,
    pub min_abs: f64,
    pub mean_abs: f64,
    /// Max over log-moneyness <= 0.
    pub max_abs_itm: f64,
}

/// Pair `points` with `baseline` point by point (same grid, same order).
pub fn error_table(method: Method, points: &[SmilePoint], baseline: &[SmilePoint]) -> Vec<ErrorRow> {
    assert_eq!(points.len(), baseline.len(), "grids differ");
    points
        .iter()
        .zip(baseline)
        .map(|(p, b)| {
            let mut flags = Vec::new();
            if !b.flag.is_empty() {
                flags.push(format!("baseline: {}", b.flag));
            }
            if !p.flag.is_empty() {
                flags.push(p.flag.clone());
            }
            let rel = if flags.is_empty() { (p.iv - b.iv) / b.iv } else { f64::NAN };
            ErrorRow {
                k: p.k,
                t: p.t,
                log_moneyness: p.log_moneyness,
                method,
                iv: p.iv,
                iv_baseline: b.iv,
                rel_error: rel,
                flag: flags.join("; "),
            }
        })
        .collect()
}

/// Per (method, T) statistics of |rel_error|, NaN rows excluded.
pub fn summarize(rows: &[ErrorRow]) -> Vec<ErrorSummary> {
    let mut keys: Vec<(Method, f64)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|&(m, t)| m == r.method && t == r.t) {
            keys.push((r.method, r.t));
        }
    }
    keys.into_iter()
        .map(|(method, t)| {
            let sel: Vec<&ErrorRow> = rows.iter().filter(|r| r.method == method && r.t == t).collect();
            let ok: Vec<&ErrorRow> = sel.iter().copied().filter(|r| r.rel_error.is_finite()).collect();
            let abs: Vec<f64> = ok.iter().map(|r| r.rel_error.abs()).collect();
            let max = |v: &mut dyn Iterator<Item = f64>| v.fold(f64::NAN, f64::max);
            ErrorSummary {
                method,
                t,
                points: sel.len(),
                nan_points: sel.len() - ok.len(),
                max_abs: max(&mut abs.iter().copied()),
                min_abs: abs.iter().copied().fold(f64::NAN, f64::min),
                mean_abs: if abs.is_empty() { f64::NAN } else { abs.iter().sum::<f64>() / abs.len() as f64 },
                max_abs_itm: max(&mut ok.iter().filter(|r| r.log_moneyness <= 0.0).map(|r| r.rel_error.abs())),
            }
        })
        .collect()
}
