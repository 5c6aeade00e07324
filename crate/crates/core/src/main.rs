use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use simplex_infogeo::aggregation::AggregationMode;
use simplex_infogeo::cli::{
    self, exit, parse_generator, parse_mode, ContrastSource, Dataset, Measure, OutputFormat, ReportError, RunConfig,
    ZeroPolicy,
};
use simplex_infogeo::divergence::FGenerator;

#[derive(Parser)]
#[command(
    name = "simplex-infogeo",
    version,
    about = "Distances, divergences and aggregation reports for compositional data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pairwise distance or divergence matrix
    Distance(DistanceArgs),
    /// Entropy, norm and distance decompositions for a part subset
    Decompose(AggregateArgs),
    /// Information-monotonicity margins under amalgamation
    MonotonicityAudit(AggregateArgs),
    /// Check that a contrast matrix is orthonormal and centred
    ContrastValidate(ContrastArgs),
}

#[derive(Args)]
struct InputArgs {
    /// CSV with a header of part names and sample ids in the first column
    #[arg(long)]
    input: PathBuf,
    /// error | replace:<eps>
    #[arg(long, default_value = "error", value_parser = clap::value_parser!(ZeroPolicyArg))]
    zero_policy: ZeroPolicyArg,
}

#[derive(Args)]
struct OutputArgs {
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// json | csv
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct DistanceArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    measure: String,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Comma-separated Box-Cox weights; defaults to D² each
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// neg-log | hellinger | pearson | total-variation
    #[arg(long, value_parser = parse_generator)]
    f_generator: Option<FGenerator>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct AggregateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Comma-separated part names
    #[arg(long, value_delimiter = ',', required = true)]
    subset: Vec<String>,
    /// subcomp | amalgam | geomean
    #[arg(long, default_value = "amalgam", value_parser = parse_mode)]
    mode: AggregationMode,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ContrastArgs {
    /// helmert | pivot | file:<path>
    #[arg(long, default_value = "helmert")]
    contrast: String,
    /// Number of parts for built-in contrasts
    #[arg(long)]
    dim: Option<usize>,
    /// Take the number of parts from this dataset's header
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone)]
struct ZeroPolicyArg(ZeroPolicy);

impl std::str::FromStr for ZeroPolicyArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(ZeroPolicyArg)
    }
}

fn threads_from_env() -> usize {
    match std::env::var(cli::THREADS_ENV) {
        Ok(v) => v.trim().parse().unwrap_or_else(|_| {
            log::warn!("ignoring {}={v:?}", cli::THREADS_ENV);
            0
        }),
        Err(_) => 0,
    }
}

fn load(args: &InputArgs) -> Result<Dataset, ReportError> {
    Ok(cli::ingest_csv(&args.input, args.zero_policy.0)?)
}

fn format(out: &OutputArgs) -> Result<OutputFormat, ReportError> {
    out.format.parse().map_err(ReportError::Usage)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), ReportError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| ReportError::Usage(format!("cannot write {}: {e}", Path::new(path).display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_only(out: &OutputArgs) -> Result<(), ReportError> {
    match format(out)? {
        OutputFormat::Json => Ok(()),
        OutputFormat::Csv => Err(ReportError::Usage("csv output is only available for distance matrices".into())),
    }
}

fn run(command: Command) -> Result<bool, ReportError> {
    let threads = threads_from_env();
    match command {
        Command::Distance(a) => {
            let measure: Measure = a.measure.parse().map_err(ReportError::Usage)?;
            let cfg = RunConfig {
                measure,
                alpha: a.alpha,
                beta: a.beta,
                weights: a.weights,
                f_generator: a.f_generator,
                zero_policy: a.input.zero_policy.0,
                format: format(&a.output)?,
                threads,
                ..RunConfig::default()
            };
            cfg.validate()?;
            let ds = load(&a.input)?;
            let m = cli::distance_matrix(&ds, &cfg)?;
            let text = match cfg.format {
                OutputFormat::Json => m.to_json(&ds, &cfg).render(),
                OutputFormat::Csv => m.to_csv(),
            };
            emit(&a.output.out, &text)?;
            Ok(true)
        }
        Command::Decompose(a) => aggregate(a, threads, cli::decompose),
        Command::MonotonicityAudit(a) => aggregate(a, threads, cli::monotonicity_report),
        Command::ContrastValidate(a) => {
            json_only(&a.output)?;
            let contrast: ContrastSource = a.contrast.parse().map_err(ReportError::Usage)?;
            let dim = match (&a.input, a.dim) {
                (_, Some(d)) => Some(d),
                (Some(path), None) => Some(header_parts(path)?),
                (None, None) => None,
            };
            let cfg = RunConfig { contrast, threads, ..RunConfig::default() };
            let report = cli::contrast_validate(&cfg, dim)?;
            emit(&a.output.out, &report.json.render())?;
            if !report.passed {
                eprintln!(
                    "contrast check failed: orthonormality deviation {:e}, centering deviation {:e}",
                    num(&report.json, "orthonormality_deviation"),
                    num(&report.json, "centering_deviation")
                );
            }
            Ok(report.passed)
        }
    }
}

fn header_parts(path: &Path) -> Result<usize, ReportError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| ReportError::Usage(format!("{}: {e}", path.display())))?;
    let header = rdr.headers().map_err(|e| ReportError::Usage(e.to_string()))?;
    Ok(header.len().saturating_sub(1))
}

fn num(doc: &cli::json::Json, key: &str) -> f64 {
    match doc.get(key) {
        Some(cli::json::Json::Num(v)) => *v,
        _ => f64::INFINITY,
    }
}

fn aggregate(
    a: AggregateArgs,
    threads: usize,
    build: fn(&Dataset, &RunConfig) -> Result<cli::Report, ReportError>,
) -> Result<bool, ReportError> {
    json_only(&a.output)?;
    let cfg = RunConfig {
        subset: a.subset,
        mode: a.mode,
        zero_policy: a.input.zero_policy.0,
        threads,
        ..RunConfig::default()
    };
    let ds = load(&a.input)?;
    let report = build(&ds, &cfg)?;
    emit(&a.output.out, &report.json.render())?;
    if !report.passed {
        eprintln!("one or more checks failed; see the report");
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::INPUT_ERROR } else { exit::SUCCESS };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match run(cli.command) {
        Ok(true) => exit::SUCCESS,
        Ok(false) => exit::VALIDATION_FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            exit::INPUT_ERROR
        }
    };
    ExitCode::from(code as u8)
}
