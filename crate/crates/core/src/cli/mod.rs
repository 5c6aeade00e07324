//! Dataset ingestion, run configuration and report assembly for the
//! command-line front end.

mod config;
mod dataset;
pub mod json;
mod report;

pub use config::{parse_generator, parse_mode, ConfigError, ContrastSource, Measure, OutputFormat, RunConfig};
pub use dataset::{ingest_csv, ingest_reader, Dataset, IngestError, ZeroPolicy};
pub use report::{
    contrast_validate, decompose, distance_matrix, monotonicity_report, resolve_subset, DistanceMatrix, Report,
    ReportError, THREADS_ENV,
};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION_FAILURE: i32 = 1;
    pub const INPUT_ERROR: i32 = 2;
}
