use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::simplex::Composition;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ZeroPolicy {
    #[default]
    Error,
    /// Zeros become `ε` before closure.
    Replace(f64),
}

impl fmt::Display for ZeroPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZeroPolicy::Error => write!(f, "error"),
            ZeroPolicy::Replace(eps) => write!(f, "replace:{eps:e}"),
        }
    }
}

impl FromStr for ZeroPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "error" {
            return Ok(ZeroPolicy::Error);
        }
        let eps = s
            .strip_prefix("replace:")
            .ok_or_else(|| format!("unknown zero policy '{s}' (expected error or replace:<eps>)"))?;
        match eps.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(ZeroPolicy::Replace(v)),
            _ => Err(format!("replacement value must be a positive number, got '{eps}'")),
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read input: {0}")]
    Io(String),
    #[error("row {row}, column {column}: cannot parse '{value}' as a nonnegative number")]
    Parse { row: usize, column: usize, value: String },
    #[error("row {row}, column {column} ('{part}'): zero part under zero policy 'error'")]
    ZeroPart { row: usize, column: usize, part: String },
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRows { row: usize, expected: usize, found: usize },
    #[error("header needs a sample-id column and at least 2 part columns")]
    Header,
    #[error("no data rows")]
    Empty,
}

/// Samples closed to compositions, with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Composition>,
    pub part_names: Vec<String>,
    pub sample_ids: Vec<String>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.part_names.len()
    }
}

pub fn ingest_csv(path: impl AsRef<Path>, policy: ZeroPolicy) -> Result<Dataset, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| IngestError::Io(format!("{}: {e}", path.display())))?;
    ingest_reader(file, policy)
}

/// Rows and columns in errors are 1-based file positions.
pub fn ingest_reader(reader: impl Read, policy: ZeroPolicy) -> Result<Dataset, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| IngestError::Io(e.to_string()))?,
        None => return Err(IngestError::Header),
    };
    if header.len() < 3 {
        return Err(IngestError::Header);
    }
    let part_names: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
    let width = header.len();

    let mut samples = Vec::new();
    let mut sample_ids = Vec::new();
    for (k, record) in records.enumerate() {
        let row = k + 2;
        let record = record.map_err(|e| IngestError::Io(e.to_string()))?;
        if record.len() != width {
            return Err(IngestError::RaggedRows { row, expected: width, found: record.len() });
        }
        let mut parts = Vec::with_capacity(width - 1);
        for (j, cell) in record.iter().enumerate().skip(1) {
            let column = j + 1;
            let cell = cell.trim();
            let value = match cell.parse::<f64>() {
                Ok(v) if v >= 0.0 && v.is_finite() => v,
                _ => return Err(IngestError::Parse { row, column, value: cell.to_string() }),
            };
            let value = match (value == 0.0, policy) {
                (false, _) => value,
                (true, ZeroPolicy::Replace(eps)) => eps,
                (true, ZeroPolicy::Error) => {
                    return Err(IngestError::ZeroPart { row, column, part: part_names[j - 1].clone() })
                }
            };
            parts.push(value);
        }
        let x = Composition::new(parts).map_err(|e| IngestError::Io(format!("row {row}: {e}")))?;
        samples.push(x.closed());
        sample_ids.push(record[0].trim().to_string());
    }
    if samples.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(Dataset { samples, part_names, sample_ids })
}
