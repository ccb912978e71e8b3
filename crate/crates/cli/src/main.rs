use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod commands;
mod manifest;

/// Ball mapper: build, draw and interrogate ε-ball graphs of point clouds.
#[derive(Debug, Parser)]
#[command(name = "tdabm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cover a CSV with ε-balls and write the graph document (JSON).
    Build(BuildArgs),
    /// Draw a graph document as SVG, or as DOT when `--out` ends in `.dot`.
    Plot(PlotArgs),
    /// Per-ball mean, sd, min and max of every variable, as CSV.
    Summary(SummaryArgs),
    /// Rebuild the cover under seeded row permutations and test claims.
    Stability(StabilityArgs),
    /// Write a synthetic two-axis dataset with outcome Y = X1 - X2.
    Synth(SynthArgs),
    /// Run the HTTP service used by the explorer.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated axis columns.
    #[arg(long, value_delimiter = ',', required = true)]
    pub axes: Vec<String>,
    /// Outcome column used for coloring.
    #[arg(long)]
    pub color: Option<String>,
    /// Standardize axes to mean 0, sd 1 before covering (default).
    #[arg(long, overrides_with = "no_standardize")]
    #[serde(skip)]
    pub standardize: bool,
    #[arg(long, overrides_with = "standardize")]
    #[serde(rename = "no_standardize")]
    pub no_standardize: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LayoutArgs {
    #[arg(long)]
    pub layout_seed: Option<u64>,
    #[arg(long)]
    pub spring_k: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct BuildArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value = "sequential")]
    pub policy: tdabm::LandmarkPolicy,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub layout: LayoutArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PlotArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Defaults to the first coloring in the document.
    #[arg(long)]
    pub coloring: Option<String>,
    /// `reds`, `rainbow`, or a JSON stop-list file.
    #[arg(long, default_value = "reds")]
    pub cmap: String,
    #[arg(long, allow_hyphen_values = true)]
    pub vmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub vmax: Option<f64>,
    #[arg(long, overrides_with = "no_colorbar")]
    #[serde(skip)]
    pub colorbar: bool,
    #[arg(long, overrides_with = "colorbar")]
    pub no_colorbar: bool,
    #[arg(long)]
    pub colorbar_label: Option<String>,
    /// Only draw balls whose coloring is strictly above this value.
    #[arg(long, allow_hyphen_values = true)]
    pub above: Option<f64>,
    /// Only draw balls whose coloring is strictly below this value.
    #[arg(long, allow_hyphen_values = true)]
    pub below: Option<f64>,
    /// Recompute the layout instead of using the stored one when any of
    /// these is given.
    #[command(flatten)]
    #[serde(flatten)]
    pub layout: LayoutArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SummaryArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// The data the graph was built from.
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to the axes recorded in the graph's manifest.
    #[arg(long, value_delimiter = ',')]
    pub axes: Option<Vec<String>>,
    /// Defaults to the outcome recorded in the graph's manifest.
    #[arg(long)]
    pub color: Option<String>,
    /// Overrides the standardization recorded in the graph's manifest.
    #[arg(long, overrides_with = "no_standardize")]
    pub standardize: bool,
    #[arg(long, overrides_with = "standardize")]
    pub no_standardize: bool,
    /// Also write the point-to-ball membership table joined with the data.
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct StabilityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    /// Repetition r shuffles rows with seed + r.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Claims such as `corr:X1:Y:+`, `balls>=:5`, `share:3:17`, `nonempty`;
    /// join with `&` for a conjunction. Repeatable.
    #[arg(long = "claim")]
    pub claims: Vec<String>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Report path; CSV when it ends in `.csv`, JSON otherwise.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Target correlation between X1 and X2.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Leave the uniform draws unstandardized.
    #[arg(long)]
    pub no_standardize: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    #[arg(long, default_value_t = 8765)]
    pub port: u16,
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
    /// Directory of static files to serve, such as the explorer build.
    #[arg(long)]
    pub assets: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<tdabm::Error> for CliError {
    fn from(e: tdabm::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("TDABM_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Build(a) => commands::build(&a),
        Command::Plot(a) => commands::plot(&a),
        Command::Summary(a) => commands::summary(&a),
        Command::Stability(a) => commands::stability(&a),
        Command::Synth(a) => commands::synth(&a),
        Command::Serve(a) => commands::serve(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
