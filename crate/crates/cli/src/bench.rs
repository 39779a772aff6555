use std::time::Instant;

use serde::Serialize;
use vix_model::{AnyModel, KernelKind};

use crate::methods::{smile, Method, SmileSpec};
use crate::CliError;

/// Wall-clock comparison of the expansion against the reference pricer on
/// the same smile grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchResult {
    pub kernel: String,
    pub points: usize,
    /// Mean seconds per full expansion smile.
    pub expansion_s: f64,
    pub expansion_repeats: usize,
    pub reference_s: f64,
    pub reference_engine: String,
    /// reference_s / expansion_s.
    pub speedup: f64,
}

/// Time both methods; the expansion is repeated until `min_seconds` have
/// elapsed (at least once), the reference runs once.
pub fn bench_model(m: &AnyModel, spec: &SmileSpec, min_seconds: f64) -> Result<BenchResult, CliError> {
    let start = Instant::now();
    let mut repeats = 0;
    let mut points = 0;
    while repeats == 0 || start.elapsed().as_secs_f64() < min_seconds {
        points = smile(m, Method::Expansion, spec)?.len();
        repeats += 1;
    }
    let expansion_s = start.elapsed().as_secs_f64() / repeats as f64;
    let t0 = Instant::now();
    smile(m, Method::Reference, spec)?;
    let reference_s = t0.elapsed().as_secs_f64();
    let kind = m.kernel_kind();
    Ok(BenchResult {
        kernel: match kind {
            KernelKind::Exponential => "exponential",
            KernelKind::PowerLaw => "power-law",
        }
        .to_string(),
        points,
        expansion_s,
        expansion_repeats: repeats,
        reference_s,
        reference_engine: match kind {
            KernelKind::Exponential => "quadrature",
            KernelKind::PowerLaw => "mc",
        }
        .to_string(),
        speedup: reference_s / expansion_s,
    })
}
