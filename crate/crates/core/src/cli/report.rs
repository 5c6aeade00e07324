use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

use super::config::{ConfigError, ContrastSource, Measure, RunConfig};
use super::dataset::{Dataset, IngestError};
use super::json::{format_number, Json};
use crate::aggregation::{
    self, AggregationMode, DecompositionReport, EntropyMode, PartSubset, ENTROPY_RESIDUAL_TOL, MARGIN_TOL,
    NORM_RESIDUAL_TOL,
};
use crate::divergence;
use crate::simplex::{self, Composition, ContrastMatrix};

/// Environment variable capping worker threads; `0` or unset means automatic.
pub const THREADS_ENV: &str = "SIMPLEX_INFOGEO_THREADS";

const SCHEMA: i64 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("unknown part name '{0}'")]
    UnknownPartName(String),
    #[error(transparent)]
    Math(#[from] crate::Error),
    #[error("{0}")]
    Usage(String),
}

/// Pairwise values of one measure, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub ids: Vec<String>,
    pub values: Vec<f64>,
    pub symmetric: bool,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("id");
        for id in &self.ids {
            out.push(',');
            out.push_str(&csv_field(id));
        }
        out.push('\n');
        for (i, id) in self.ids.iter().enumerate() {
            out.push_str(&csv_field(id));
            for v in self.row(i) {
                out.push(',');
                out.push_str(&format_number(*v));
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A rendered report and whether all of its checks passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub json: Json,
    pub passed: bool,
}

fn with_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(job),
        Err(e) => {
            log::warn!("falling back to the global pool: {e}");
            job()
        }
    }
}

fn box_cox_weights(cfg: &RunConfig, dim: usize) -> Result<Vec<f64>, ReportError> {
    match &cfg.weights {
        Some(w) if w.len() != dim => Err(crate::Error::DimensionMismatch { expected: dim, found: w.len() }.into()),
        Some(w) => Ok(w.clone()),
        None => Ok(vec![(dim * dim) as f64; dim]),
    }
}

fn measure(cfg: &RunConfig, weights: &[f64], x: &Composition, y: &Composition) -> crate::Result<f64> {
    Ok(match cfg.measure {
        Measure::Aitchison => simplex::aitchison_distance(x, y)?,
        Measure::Kl => divergence::kl(x, y)?.value,
        Measure::KlReverse => divergence::kl_reverse(x, y)?.value,
        Measure::Alpha => divergence::alpha_divergence(cfg.alpha.unwrap_or(0.0), x, y)?.value,
        Measure::Hellinger => divergence::hellinger(x, y)?,
        Measure::Fisher => divergence::fisher_distance(x, y)?,
        Measure::Bhattacharyya => -divergence::bhattacharyya(x, y)?.min(1.0).ln(),
        Measure::BoxCox => divergence::boxcox_distance(cfg.beta.unwrap_or(1.0), weights, x, y)?,
        Measure::F => {
            let g = cfg.f_generator.unwrap_or(divergence::FGenerator::NegLog);
            divergence::f_divergence(|t| g.eval(t), x, y)?.value
        }
    })
}

/// Entry `(i, j)` is the configured measure from sample `i` to sample `j`.
///
/// Symmetric measures are evaluated once per unordered pair and mirrored;
/// the diagonal is zero. Output does not depend on the thread count.
pub fn distance_matrix(ds: &Dataset, cfg: &RunConfig) -> Result<DistanceMatrix, ReportError> {
    cfg.validate()?;
    let n = ds.len();
    let weights = box_cox_weights(cfg, ds.dim())?;
    let symmetric = cfg.is_symmetric();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| if symmetric { i < j } else { i != j })
        .collect();
    let computed: crate::Result<Vec<f64>> = with_pool(cfg.threads, || {
        pairs.par_iter().map(|&(i, j)| measure(cfg, &weights, &ds.samples[i], &ds.samples[j])).collect()
    });
    let mut values = vec![0.0; n * n];
    for (&(i, j), v) in pairs.iter().zip(computed?) {
        values[i * n + j] = v;
        if symmetric {
            values[j * n + i] = v;
        }
    }
    Ok(DistanceMatrix { ids: ds.sample_ids.clone(), values, symmetric })
}

pub fn resolve_subset(ds: &Dataset, names: &[String]) -> Result<PartSubset, ReportError> {
    if names.is_empty() {
        return Err(ReportError::Usage("--subset is required".into()));
    }
    let indices = names
        .iter()
        .map(|name| {
            ds.part_names.iter().position(|p| p == name).ok_or_else(|| ReportError::UnknownPartName(name.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PartSubset::new(&indices, ds.dim())?)
}

fn metadata(ds: Option<&Dataset>, cfg: &RunConfig, command: &str) -> Json {
    let mut params = Json::obj();
    if let Some(a) = cfg.alpha {
        params = params.with("alpha", a);
    }
    if let Some(b) = cfg.beta {
        params = params.with("beta", b);
    }
    if cfg.measure == Measure::BoxCox {
        let dim = ds.map_or(0, Dataset::dim);
        params = params.with("weights", cfg.weights.clone().unwrap_or_else(|| vec![(dim * dim) as f64; dim]));
    }
    if let Some(g) = cfg.f_generator {
        params = params.with("f_generator", g.name());
    }
    let mut meta = Json::obj().with("tool", "simplex-infogeo").with("version", crate::VERSION).with("command", command);
    if command == "distance" {
        meta = meta.with("measure", cfg.measure.name()).with("parameters", params);
    }
    if command == "decompose" || command == "monotonicity-audit" {
        meta = meta.with("subset", cfg.subset.iter().map(String::as_str).collect::<Vec<_>>());
    }
    if command == "decompose" {
        meta = meta.with("mode", cfg.mode.name());
    }
    if command == "contrast-validate" {
        meta = meta.with("contrast", cfg.contrast.to_string());
    }
    if let Some(ds) = ds {
        meta = meta
            .with("zero_policy", cfg.zero_policy.to_string())
            .with("samples", ds.len())
            .with("parts", ds.part_names.iter().map(String::as_str).collect::<Vec<_>>());
    }
    meta
}

fn envelope(ds: Option<&Dataset>, cfg: &RunConfig, command: &str) -> Json {
    Json::obj().with("schema", SCHEMA).with("metadata", metadata(ds, cfg, command))
}

impl DistanceMatrix {
    pub fn to_json(&self, ds: &Dataset, cfg: &RunConfig) -> Json {
        let rows: Vec<Json> = (0..self.n()).map(|i| self.row(i).to_vec().into()).collect();
        envelope(Some(ds), cfg, "distance")
            .with("symmetric", self.symmetric)
            .with("ids", self.ids.clone())
            .with("matrix", Json::Arr(rows))
    }
}

fn decomposition_json(r: &DecompositionReport, tol: f64) -> (Json, bool) {
    let passed = r.residual.abs() <= tol;
    let terms = Json::Obj(r.terms.iter().map(|(k, v)| (k.to_string(), Json::Num(*v))).collect());
    (Json::obj().with("lhs", r.lhs).with("terms", terms).with("residual", r.residual).with("passed", passed), passed)
}

fn entropy_mode(mode: AggregationMode) -> EntropyMode {
    match mode {
        AggregationMode::Subcomposition => EntropyMode::Subcomposition,
        _ => EntropyMode::Amalgamation,
    }
}

/// Entropy and norm decompositions per sample and, for the amalgam and
/// geomean modes, distance decompositions per unordered pair.
pub fn decompose(ds: &Dataset, cfg: &RunConfig) -> Result<Report, ReportError> {
    let subset = resolve_subset(ds, &cfg.subset)?;
    let mut passed = true;
    let mut samples = Vec::with_capacity(ds.len());
    for (id, x) in ds.sample_ids.iter().zip(&ds.samples) {
        let (entropy, ok_e) = decomposition_json(
            &aggregation::entropy_decomposition(x, &subset, entropy_mode(cfg.mode))?,
            ENTROPY_RESIDUAL_TOL,
        );
        let (norm, ok_n) =
            decomposition_json(&aggregation::norm_decomposition(x, &subset, cfg.mode)?, NORM_RESIDUAL_TOL);
        passed &= ok_e && ok_n;
        samples.push(Json::obj().with("id", id.as_str()).with("entropy", entropy).with("norm", norm));
    }
    let mut doc = envelope(Some(ds), cfg, "decompose").with("samples", Json::Arr(samples));
    if cfg.mode != AggregationMode::Subcomposition {
        let pairs: Vec<(usize, usize)> = (0..ds.len()).flat_map(|i| (i + 1..ds.len()).map(move |j| (i, j))).collect();
        let reports: crate::Result<Vec<DecompositionReport>> = with_pool(cfg.threads, || {
            pairs
                .par_iter()
                .map(|&(i, j)| aggregation::distance_decomposition(&ds.samples[i], &ds.samples[j], &subset, cfg.mode))
                .collect()
        });
        let mut out = Vec::with_capacity(pairs.len());
        for (&(i, j), r) in pairs.iter().zip(reports?) {
            let (mut json, mut ok) = decomposition_json(&r, NORM_RESIDUAL_TOL);
            if cfg.mode == AggregationMode::GeometricMean {
                ok &= r.term("interaction").is_some_and(|v| v >= MARGIN_TOL);
            }
            if let Json::Obj(fields) = &mut json {
                fields.insert(0, ("y".into(), ds.sample_ids[j].as_str().into()));
                fields.insert(0, ("x".into(), ds.sample_ids[i].as_str().into()));
                fields.last_mut().expect("passed field").1 = ok.into();
            }
            passed &= ok;
            out.push(json);
        }
        doc = doc.with("pairs", Json::Arr(out));
    }
    Ok(Report { json: doc.with("passed", passed), passed })
}

/// Information-monotonicity margins for every ordered pair of distinct samples.
pub fn monotonicity_report(ds: &Dataset, cfg: &RunConfig) -> Result<Report, ReportError> {
    let subset = resolve_subset(ds, &cfg.subset)?;
    let n = ds.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
    let audits: crate::Result<Vec<aggregation::MonotonicityAudit>> = with_pool(cfg.threads, || {
        pairs
            .par_iter()
            .map(|&(i, j)| aggregation::monotonicity_audit(&ds.samples[i], &ds.samples[j], &subset))
            .collect()
    });
    let mut passed = true;
    let mut out = Vec::with_capacity(pairs.len());
    for (&(i, j), a) in pairs.iter().zip(audits?) {
        passed &= a.passed();
        out.push(
            Json::obj()
                .with("x", ds.sample_ids[i].as_str())
                .with("y", ds.sample_ids[j].as_str())
                .with("aitchison_before", a.aitchison_before)
                .with("aitchison_after", a.aitchison_after)
                .with("aitchison_margin", a.aitchison_margin)
                .with("kl_before", a.kl_before)
                .with("kl_after", a.kl_after)
                .with("kl_margin", a.kl_margin)
                .with("geomean_margin", a.geomean_margin)
                .with("passed", a.passed()),
        );
    }
    let doc = envelope(Some(ds), cfg, "monotonicity-audit").with("pairs", Json::Arr(out)).with("passed", passed);
    Ok(Report { json: doc, passed })
}

fn read_matrix(path: &std::path::Path) -> Result<DMatrix<f64>, ReportError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| IngestError::Io(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| IngestError::Io(e.to_string()))?;
        let parsed: Result<Vec<f64>, usize> =
            record.iter().enumerate().map(|(j, c)| c.trim().parse::<f64>().map_err(|_| j)).collect();
        match parsed {
            Ok(row) => rows.push(row),
            // a non-numeric first line is a header
            Err(_) if k == 0 => continue,
            Err(j) => return Err(IngestError::Parse { row: k + 1, column: j + 1, value: record[j].to_string() }.into()),
        }
    }
    let cols = rows.first().map_or(0, Vec::len);
    if let Some((k, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(IngestError::RaggedRows { row: k + 1, expected: cols, found: r.len() }.into());
    }
    if rows.is_empty() {
        return Err(IngestError::Empty.into());
    }
    Ok(DMatrix::from_row_slice(rows.len(), cols, &rows.concat()))
}

/// Checks the configured contrast matrix; `dim` is needed for the built-in kinds.
pub fn contrast_validate(cfg: &RunConfig, dim: Option<usize>) -> Result<Report, ReportError> {
    let entries = match &cfg.contrast {
        ContrastSource::File(path) => read_matrix(path)?,
        builtin => {
            let d = dim.ok_or_else(|| ReportError::Usage("built-in contrasts need --dim or --input".into()))?;
            let v =
                if *builtin == ContrastSource::Pivot { ContrastMatrix::pivot(d)? } else { ContrastMatrix::helmert(d)? };
            v.entries().clone()
        }
    };
    let r = simplex::validate_contrast(&entries);
    let doc = Json::obj()
        .with("schema", SCHEMA)
        .with("metadata", metadata(None, cfg, "contrast-validate"))
        .with("rows", r.rows)
        .with("cols", r.cols)
        .with("shape_ok", r.shape_ok)
        .with("orthonormality_deviation", r.orthonormality_deviation)
        .with("centering_deviation", r.centering_deviation)
        .with("tolerance", simplex::CONTRAST_TOL)
        .with("passed", r.passed);
    Ok(Report { json: doc, passed: r.passed })
}
