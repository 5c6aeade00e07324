use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use super::dataset::ZeroPolicy;
use crate::aggregation::AggregationMode;
use crate::divergence::FGenerator;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Aitchison,
    Kl,
    KlReverse,
    Alpha,
    Hellinger,
    Fisher,
    Bhattacharyya,
    BoxCox,
    F,
}

impl Measure {
    pub const ALL: [Measure; 9] = [
        Measure::Aitchison,
        Measure::Kl,
        Measure::KlReverse,
        Measure::Alpha,
        Measure::Hellinger,
        Measure::Fisher,
        Measure::Bhattacharyya,
        Measure::BoxCox,
        Measure::F,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Aitchison => "aitchison",
            Measure::Kl => "kl",
            Measure::KlReverse => "kl_reverse",
            Measure::Alpha => "alpha",
            Measure::Hellinger => "hellinger",
            Measure::Fisher => "fisher",
            Measure::Bhattacharyya => "bhattacharyya",
            Measure::BoxCox => "boxcox",
            Measure::F => "f",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Measure::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| format!("unknown measure '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ContrastSource {
    #[default]
    Helmert,
    Pivot,
    File(PathBuf),
}

impl FromStr for ContrastSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "helmert" => Ok(ContrastSource::Helmert),
            "pivot" => Ok(ContrastSource::Pivot),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(ContrastSource::File(PathBuf::from(p))),
                _ => Err(format!("unknown contrast '{s}' (expected helmert, pivot or file:<path>)")),
            },
        }
    }
}

impl fmt::Display for ContrastSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContrastSource::Helmert => f.write_str("helmert"),
            ContrastSource::Pivot => f.write_str("pivot"),
            ContrastSource::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(format!("unknown format '{s}'")),
        }
    }
}

pub fn parse_mode(s: &str) -> Result<AggregationMode, String> {
    match s {
        "subcomp" => Ok(AggregationMode::Subcomposition),
        "amalgam" => Ok(AggregationMode::Amalgamation),
        "geomean" => Ok(AggregationMode::GeometricMean),
        _ => Err(format!("unknown mode '{s}' (expected subcomp, amalgam or geomean)")),
    }
}

pub fn parse_generator(s: &str) -> Result<FGenerator, String> {
    [FGenerator::NegLog, FGenerator::Hellinger, FGenerator::Pearson, FGenerator::TotalVariation]
        .into_iter()
        .find(|g| g.name() == s)
        .ok_or_else(|| format!("unknown f generator '{s}'"))
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("measure '{measure}' requires --{param}")]
    MissingParameter { measure: Measure, param: &'static str },
    #[error("--{param} is not used by measure '{measure}'")]
    UnusedParameter { measure: Measure, param: &'static str },
    #[error("invalid value for --{param}: {value}")]
    InvalidParameter { param: &'static str, value: String },
}

/// Everything a run needs besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub measure: Measure,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// Box-Cox weights; `ωᵢ = D²` when absent.
    pub weights: Option<Vec<f64>>,
    pub f_generator: Option<FGenerator>,
    pub contrast: ContrastSource,
    pub zero_policy: ZeroPolicy,
    pub subset: Vec<String>,
    pub mode: AggregationMode,
    pub format: OutputFormat,
    /// Worker cap for pairwise loops; 0 lets the pool decide.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            measure: Measure::Aitchison,
            alpha: None,
            beta: None,
            weights: None,
            f_generator: None,
            contrast: ContrastSource::Helmert,
            zero_policy: ZeroPolicy::Error,
            subset: Vec::new(),
            mode: AggregationMode::Amalgamation,
            format: OutputFormat::Json,
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn new(measure: Measure) -> Self {
        Self { measure, ..Self::default() }
    }

    /// Parameter presence must match the measure.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let m = self.measure;
        let need = |present: bool, param| {
            if present {
                Ok(())
            } else {
                Err(ConfigError::MissingParameter { measure: m, param })
            }
        };
        let forbid = |present: bool, param| {
            if present {
                Err(ConfigError::UnusedParameter { measure: m, param })
            } else {
                Ok(())
            }
        };
        need(self.alpha.is_some() || m != Measure::Alpha, "alpha")?;
        forbid(self.alpha.is_some() && m != Measure::Alpha, "alpha")?;
        need(self.beta.is_some() || m != Measure::BoxCox, "beta")?;
        forbid(self.beta.is_some() && m != Measure::BoxCox, "beta")?;
        forbid(self.weights.is_some() && m != Measure::BoxCox, "weights")?;
        need(self.f_generator.is_some() || m != Measure::F, "f-generator")?;
        forbid(self.f_generator.is_some() && m != Measure::F, "f-generator")?;
        for (param, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if let Some(v) = v.filter(|v| !v.is_finite()) {
                return Err(ConfigError::InvalidParameter { param, value: v.to_string() });
            }
        }
        if let Some(w) = &self.weights {
            if let Some(v) = w.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(ConfigError::InvalidParameter { param: "weights", value: v.to_string() });
            }
        }
        Ok(())
    }

    /// Whether `D(x, y) = D(y, x)` for every pair.
    pub fn is_symmetric(&self) -> bool {
        match self.measure {
            Measure::Aitchison | Measure::Hellinger | Measure::Fisher | Measure::Bhattacharyya | Measure::BoxCox => {
                true
            }
            Measure::Alpha => self.alpha == Some(0.0),
            Measure::F => matches!(self.f_generator, Some(FGenerator::Hellinger | FGenerator::TotalVariation)),
            Measure::Kl | Measure::KlReverse => false,
        }
    }
}
