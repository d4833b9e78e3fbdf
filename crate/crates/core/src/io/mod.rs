//! File formats: Touchstone traces, sweep and manifest CSVs, JSON/CSV
//! reports, and the bundled benchmark catalog.

pub mod catalog;
pub mod manifest;
pub mod report;
pub mod sweep_csv;
pub mod touchstone;

pub use catalog::{catalog, catalog_query, CatalogEntry, CatalogFilter, CatalogValue};
pub use manifest::{parse_manifest, ManifestRow};
pub use report::{parse_report, write_report, ReportDocument, ReportFormat};
pub use sweep_csv::{parse_sweep_csv, write_sweep_csv, SweepDevice};
pub use touchstone::{parse_touchstone, parse_touchstone_rows, write_touchstone, DataFormat};

use std::path::PathBuf;

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: malformed option line: {message}")]
    MalformedOptionLine { line: usize, message: String },
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("line {line}: expected {expected} numbers, found {found}")]
    RowArity {
        line: usize,
        found: usize,
        expected: usize,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing or unrecognised header: {0}")]
    MissingHeader(String),
    #[error("row {row}: {column} must be positive")]
    NonPositiveValue { row: usize, column: String },
    #[error("power-keyed sweep needs f_r, Q_l and |Q_c| to convert dBm to photon number")]
    MissingDevice,
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("report: {0}")]
    Report(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl IoError {
    pub fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::File {
            path: path.into(),
            source,
        }
    }
}

/// Reads a file to a string, attaching the path to any error.
pub fn read_text(path: impl AsRef<std::path::Path>) -> Result<String, IoError> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| IoError::file(path, e))
}
