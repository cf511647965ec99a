//! `heliocast` command-line tool.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use heliocast_core::dataset::{DEFAULT_SEED, DEFAULT_TRAIN_FRACTION};
use heliocast_core::harness::ModelKind;

#[derive(Parser)]
#[command(name = "heliocast", version, about = "Solar irradiance regression toolkit and forecasting service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print descriptive statistics (count, mean, std, min, quartiles, max).
    Summarize(SummarizeArgs),
    /// Write the Pearson correlation matrix and list selected variables.
    Correlate(CorrelateArgs),
    /// Fit one model on the training split and save it as a `.hcm` file.
    Train(TrainArgs),
    /// Train and score the reference model suite on one shared split.
    Evaluate(EvaluateArgs),
    /// Write actual vs predicted irradiance for one day.
    ExportPlots(ExportPlotsArgs),
    /// Write synthetic pyranometer records as CSV.
    Generate(GenerateArgs),
    /// Run the HTTP forecasting service.
    Serve(ServeArgs),
    /// Request a forecast from a running service.
    Forecast(ForecastArgs),
    /// List the models loaded by a running service.
    Models(UrlArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Records CSV with header `timestamp,irradiance_wm2,temperature_k`.
    #[arg(long)]
    data: PathBuf,
    /// Replace negative irradiance with 0 before use (off keeps night-time
    /// sensor offsets as recorded).
    #[arg(long)]
    clamp_negative: bool,
}

#[derive(Args, Clone)]
struct FeatureArgs {
    /// Model inputs, from temperature, hour, month.
    #[arg(long, value_delimiter = ',', default_value = "temperature,hour")]
    features: Vec<Feature>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Feature {
    Temperature,
    Hour,
    Month,
}

#[derive(Args, Clone)]
struct SplitArgs {
    /// Fraction of rows used for training.
    #[arg(long, default_value_t = DEFAULT_TRAIN_FRACTION)]
    split: f64,
    /// Seed for the split and every seeded estimator (reference random_state=42).
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct SummarizeArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Also write the table as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct CorrelateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    features: FeatureArgs,
    /// Minimum |r| with irradiance for a variable to be selected.
    #[arg(long, default_value_t = heliocast_core::analysis::DEFAULT_SELECTION_THRESHOLD)]
    threshold: f64,
    /// Matrix CSV destination.
    #[arg(long, default_value = "correlation.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Estimator kind: mean, linear, polynomial, knn, tree, svr_linear,
    /// svr_poly, svr_rbf, forest or gbr.
    #[arg(long, value_parser = parse_kind)]
    model: ModelKind,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    features: FeatureArgs,
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    hyper: HyperArgs,
    /// Destination `.hcm` file.
    #[arg(long)]
    out: PathBuf,
}

/// Overrides for the reference hyperparameters.
#[derive(Args, Clone, Default)]
struct HyperArgs {
    /// Polynomial degree for `polynomial` [default: 2, reference degree=2].
    #[arg(long)]
    degree: Option<u32>,
    /// Neighbours for `knn` [default: 10, reference n_neighbors=10].
    #[arg(long)]
    k: Option<usize>,
    /// Standardize features before KNN distances.
    #[arg(long)]
    standardize: bool,
    /// Tree depth for `tree` [default: 3, reference max_depth=3] and `gbr`
    /// [default: 5, reference max_depth=5].
    #[arg(long)]
    max_depth: Option<usize>,
    /// Trees in `forest` [default: 100, reference n_estimators=100].
    #[arg(long)]
    trees: Option<usize>,
    /// Boosting stages in `gbr` [default: 100, reference n_estimators=100].
    #[arg(long)]
    stages: Option<usize>,
    /// Shrinkage in `gbr` [default: 0.2, reference learning_rate=0.2].
    #[arg(long)]
    learning_rate: Option<f64>,
    /// SVR box constraint [default: 1.0].
    #[arg(long)]
    c: Option<f64>,
    /// SVR tube half-width [default: 0.1].
    #[arg(long)]
    epsilon: Option<f64>,
    /// SVR kernel gamma [default: 1 / (d * Var(X))].
    #[arg(long)]
    gamma: Option<f64>,
    /// SVR training rows, stratified by target [default: 2000; 0 uses all].
    #[arg(long)]
    svr_subsample: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    features: FeatureArgs,
    #[command(flatten)]
    split: SplitArgs,
    /// Kernel for the "SVR Kernel RBF" row: `poly` follows the reference
    /// configuration (kernel='poly'), `rbf` uses a true RBF kernel.
    #[arg(long, value_enum, default_value_t = RbfRowKernel::Poly)]
    rbf_row_kernel: RbfRowKernel,
    /// SVR training rows, stratified by target [default: 2000; 0 uses all].
    #[arg(long)]
    svr_subsample: Option<usize>,
    /// Output directory for comparison.csv, comparison.txt and comparison.json.
    #[arg(long, default_value = "report")]
    out: PathBuf,
    /// Also copy the JSON report into this model directory for the service.
    #[arg(long)]
    publish: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum RbfRowKernel {
    Poly,
    Rbf,
}

#[derive(Args)]
struct ExportPlotsArgs {
    /// Trained `.hcm` model.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Day to export, YYYY-MM-DD.
    #[arg(long, default_value = "2020-05-02")]
    day: NaiveDate,
    /// Plot CSV destination [default: plot-<day>.csv].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of days of 5-minute records.
    #[arg(long, default_value_t = 60)]
    days: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// First day, YYYY-MM-DD.
    #[arg(long, default_value = "2020-05-01")]
    start: NaiveDate,
    /// CSV destination.
    #[arg(long, default_value = "synthetic.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "BIND_ADDR", default_value = heliocast_service::config::DEFAULT_BIND_ADDR)]
    bind: std::net::SocketAddr,
    /// Directory of `.hcm` models and the published evaluation report.
    #[arg(long, env = "MODEL_DIR", default_value = heliocast_service::config::DEFAULT_MODEL_DIR)]
    model_dir: PathBuf,
    /// Temperature source: `mock` (deterministic profile) or `real`.
    #[arg(long, env = "WEATHER_PROVIDER", default_value = "mock")]
    provider: String,
    /// API base URL for the real provider.
    #[arg(long, env = "WEATHER_BASE_URL", default_value = heliocast_service::provider::DEFAULT_BASE_URL)]
    weather_base_url: String,
}

#[derive(Args)]
struct UrlArgs {
    /// Service base URL.
    #[arg(long, default_value = heliocast_client::DEFAULT_URL)]
    url: String,
}

#[derive(Args)]
struct ForecastArgs {
    #[command(flatten)]
    url: UrlArgs,
    /// Model id (file stem in the service's model directory).
    #[arg(long)]
    model: String,
    /// Forecast horizon in hours, 1 to 168.
    #[arg(long, default_value_t = 24)]
    hours: u32,
    /// Clamp predictions at 0 W/m².
    #[arg(long)]
    clamp: bool,
    /// Print raw JSON instead of a table.
    #[arg(long)]
    json: bool,
}

fn parse_kind(s: &str) -> Result<ModelKind, String> {
    s.parse::<ModelKind>().map_err(|_| {
        let names: Vec<&str> = ModelKind::ALL.iter().map(|k| k.as_str()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
