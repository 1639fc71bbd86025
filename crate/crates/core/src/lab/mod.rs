//! Experiment runners, their configuration, and CSV/JSON emission.

mod checks;
mod config;
mod emit;
mod experiments;

use std::collections::BTreeMap;
use std::path::PathBuf;

use thiserror::Error;

pub use checks::{self_check, CheckOutcome};
pub use config::{Experiment, ExperimentConfig, Format, ParamKind, ParamSpec, ParamValue, Range};
pub use emit::{emit, format_real, parse_json, render, render_csv, render_json, strip_timing};
pub use experiments::{
    run, run_circulant_spectrum, run_double_well_sweep, run_frame_rank, run_near_symmetry_sweep,
    run_oracle_check, run_parity_census, CROSSOVER_PARITY_THRESHOLD,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),

    #[error("refusing to overwrite existing file {0} (pass --force)")]
    Refused(PathBuf),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed result file: {0}")]
    Parse(String),

    #[error(transparent)]
    Numerical(crate::Error),
}

impl From<crate::Error> for LabError {
    fn from(err: crate::Error) -> Self {
        match err {
            crate::Error::InvalidArgument(msg) | crate::Error::PreconditionViolation(msg) => LabError::Config(msg),
            other => LabError::Numerical(other),
        }
    }
}

/// One output field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    /// Undefined for this row (e.g. a prediction that diverges).
    Null,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(x) => Some(*x as f64),
            Cell::Real(x) => Some(*x),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Null, Cell::Real)
    }
}

/// Wall-clock information, the only non-deterministic part of a result.
#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub timestamp: String,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub version: String,
    pub seed: u64,
    pub params: BTreeMap<String, ParamValue>,
    /// Thresholds and bounds that are conventions of this tool rather than
    /// derived quantities.
    pub conventions: Vec<(String, String)>,
    pub timing: Option<Timing>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub experiment: Experiment,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Scalars derived from the whole sweep (crossover points, pass counts).
    pub summary: Vec<(String, Cell)>,
    pub metadata: RunMetadata,
}

impl SweepResult {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column, `None` where a row has no number.
    pub fn column(&self, name: &str) -> Vec<Option<f64>> {
        let idx = self.column_index(name).unwrap_or_else(|| panic!("no column `{name}`"));
        self.rows.iter().map(|r| r[idx].as_f64()).collect()
    }

    pub fn summary_value(&self, key: &str) -> Option<&Cell> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}
