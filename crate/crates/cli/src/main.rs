//! `rpeqda`: train, apply and benchmark random projection ensembles of QDA models.

mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rpeqda::data::CsvOptions;
use rpeqda::{Error, ProjectionFamily, RpeConfig, SchemeId};
use serde::Serialize;

#[derive(Parser, Debug, Serialize)]
#[command(name = "rpeqda", version, about = "Random projection ensemble QDA for high-dimensional classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Replicated simulation benchmark on a synthetic scheme.
    Bench(BenchArgs),
    /// Fit an ensemble on a labelled CSV and save it as a model file.
    Train(TrainArgs),
    /// Classify the rows of a CSV with a saved model.
    Predict(PredictArgs),
    /// Leave-one-out cross-validation on a labelled CSV.
    Cv(CvArgs),
    /// Pairwise log(θ/p) separation diagnostic between classes.
    KlDiag(KlDiagArgs),
    /// Project onto one random plane and map the QDA decision regions there.
    Viz2d(Viz2dArgs),
    /// Export samples of a synthetic scheme as CSV.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct EnsembleArgs {
    /// Number of ensemble members.
    #[arg(long = "B", default_value_t = 200)]
    b: usize,
    /// Reduced dimension; defaults to min(n_min - 1, ceil(ln p), 10).
    #[arg(long)]
    d: Option<usize>,
    /// Master seed of the projection stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ridge added to every projected covariance.
    #[arg(long, default_value_t = 0.0)]
    ridge: f64,
}

impl EnsembleArgs {
    fn config(&self, family: ProjectionFamily) -> RpeConfig {
        RpeConfig {
            b: self.b,
            d: self.d,
            family,
            master_seed: self.seed,
            ridge: self.ridge,
            ..RpeConfig::default()
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct InputArgs {
    /// Labelled CSV file.
    #[arg(long)]
    data: PathBuf,
    /// One-based column holding the class label.
    #[arg(long, default_value_t = 1)]
    label_col: usize,
    /// The first line is data, not a header.
    #[arg(long)]
    no_header: bool,
}

impl InputArgs {
    fn load(&self) -> rpeqda::Result<rpeqda::Dataset> {
        if self.label_col == 0 {
            return Err(Error::InvalidParameter("--label-col is one-based".into()));
        }
        let options = CsvOptions {
            has_header: !self.no_header,
            label_col: self.label_col - 1,
        };
        rpeqda::data::ingest_csv(&self.data, options)
    }
}

fn parse_family(s: &str) -> Result<ProjectionFamily, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_scheme(s: &str) -> Result<SchemeId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Debug, Serialize)]
struct BenchArgs {
    /// s1, s2, s3, s4 or example2.
    #[arg(long, value_parser = parse_scheme)]
    scheme: SchemeId,
    /// Dimension; may be repeated or comma separated.
    #[arg(long = "p", value_delimiter = ',')]
    p: Vec<usize>,
    /// Further dimensions, comma separated.
    #[arg(long = "p-list", value_delimiter = ',')]
    p_list: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    /// Projection families, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "sn", value_parser = parse_family)]
    family: Vec<ProjectionFamily>,
    #[command(flatten)]
    #[serde(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long, default_value_t = 1)]
    data_seed: u64,
    #[arg(long, default_value_t = 100)]
    n_train: usize,
    #[arg(long, default_value_t = 200)]
    n_test: usize,
    /// Output directory for report.json, table.csv and timing.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct TrainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long, default_value = "sn", value_parser = parse_family)]
    family: ProjectionFamily,
    /// Store member seeds instead of projection matrices.
    #[arg(long)]
    compact: bool,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct PredictArgs {
    /// Model file written by `train`.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    input: InputArgs,
    /// Prediction CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct CvArgs {
    #[command(flatten)]
    #[serde(flatten)]
    input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long, default_value = "sn", value_parser = parse_family)]
    family: ProjectionFamily,
    /// Report JSON to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct KlDiagArgs {
    #[command(flatten)]
    #[serde(flatten)]
    input: InputArgs,
    /// Matrix CSV to write.
    #[arg(long)]
    out: PathBuf,
    /// Optional heatmap.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct Viz2dArgs {
    #[command(flatten)]
    #[serde(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "sn", value_parser = parse_family)]
    family: ProjectionFamily,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    ridge: f64,
    /// Grid points per axis.
    #[arg(long, default_value_t = 40)]
    grid: usize,
    /// Output directory for points.csv and grid.csv.
    #[arg(long)]
    out: PathBuf,
    /// Optional scatter plot.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[arg(long, value_parser = parse_scheme)]
    scheme: SchemeId,
    #[arg(long = "p")]
    p: usize,
    /// Samples per class.
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    data_seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run_config = serde_json::to_value(&cli.command).expect("run config serializes");
    let result = match &cli.command {
        Command::Bench(a) => commands::bench(a, &run_config),
        Command::Train(a) => commands::train(a, &run_config),
        Command::Predict(a) => commands::predict(a, &run_config),
        Command::Cv(a) => commands::cv(a, &run_config),
        Command::KlDiag(a) => commands::kl_diag(a, &run_config),
        Command::Viz2d(a) => commands::viz2d(a, &run_config),
        Command::Simulate(a) => commands::simulate(a, &run_config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
