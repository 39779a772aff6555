//! Command-line front end for the VIX pricing crates.
//!
//! Every command writes CSV or JSON plus a `<out>.manifest.json` recording
//! the arguments, seeds, thread count and output checksums, so a run can be
//! replayed and compared byte for byte. Levels are decimals (a VIX of 24 is
//! 0.24).

pub mod bench;
pub mod commands;
pub mod errors;
pub mod manifest;
pub mod methods;

pub use commands::{run, Cli, Command};
pub use errors::{error_table, summarize, ErrorRow, ErrorSummary};
pub use manifest::{OutputFile, RunManifest};
pub use methods::{anchor_future, order_for, smile, Method, SmilePoint, SmileSpec, METHODS};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    /// Process exit code: 2 usage, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<vix_model::ModelError> for CliError {
    fn from(e: vix_model::ModelError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<vix_single::SingleError> for CliError {
    fn from(e: vix_single::SingleError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<vix_mixed::MixedError> for CliError {
    fn from(e: vix_mixed::MixedError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<vix_blackscholes::BsError> for CliError {
    fn from(e: vix_blackscholes::BsError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<vix_reference::RefError> for CliError {
    fn from(e: vix_reference::RefError) -> Self {
        use vix_reference::RefError as R;
        match e {
            R::WrongPricer(_) | R::Config(_) | R::Model(_) | R::Csv(_) | R::Io(_) => CliError::Data(e.to_string()),
            R::Covariance { .. } | R::Math(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<vix_calib::CalibError> for CliError {
    fn from(e: vix_calib::CalibError) -> Self {
        use vix_calib::CalibError as C;
        match e {
            C::Parse { .. } | C::EmptyChain | C::Data(_) | C::Config(_) | C::Csv(_) | C::Io(_) | C::Model(_) => {
                CliError::Data(e.to_string())
            }
            C::FuturesUnattainable { .. } | C::Single(_) | C::Mixed(_) => CliError::Numerical(e.to_string()),
        }
    }
}

/// Read a model JSON file.
pub fn load_model(path: &std::path::Path) -> Result<vix_model::AnyModel, CliError> {
    let s = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let f = vix_model::ModelFile::from_json(&s).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(f.to_model()?)
}
