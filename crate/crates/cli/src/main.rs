//! `heatframes`: build frames, verify their properties, compute norms and
//! approximation curves.

mod build;
mod config;
mod output;
mod tasks;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heatframes::Error;

#[derive(Debug, Parser)]
#[command(name = "heatframes", version, about, args_override_self = true)]
pub struct Cli {
    /// JSON file whose entries act as flags (explicit flags take precedence).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a frame and write it to a `.hkf` file.
    Build(BuildArgs),
    /// Run verification suites against a saved frame.
    Verify(VerifyArgs),
    /// Besov and Triebel-Lizorkin norms of test functions by several routes.
    Norms(NormsArgs),
    /// Greedy n-term approximation curve and Jackson-rate check.
    Approx(ApproxArgs),
    /// JSON summary of a saved frame.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SpaceArg {
    Torus,
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Frame1,
    Dual,
    Tight,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long, value_enum, default_value = "torus")]
    pub space: SpaceArg,
    /// Jacobi parameter α.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Jacobi parameter β.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub beta: f64,
    /// Spectral truncation: eigenfunctions `e_0 .. e_N`.
    #[arg(long = "N", value_name = "N")]
    pub n: usize,
    /// Quadrature resolution (default 4N+2 on the torus, 8N+2 on Jacobi).
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub b: f64,
    /// Highest level `J`.
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    #[arg(long, value_enum, default_value = "tight")]
    pub variant: VariantArg,
    /// Net constant `γ`, or `auto` to select it from the sampling tolerance.
    #[arg(long, default_value = "auto")]
    pub gamma: String,
    /// Cut-off smoothness parameter `ε`.
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// JSON summary path (default: next to `--out`).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    FrameBounds,
    Reconstruction,
    Sampling,
    Cubature,
    Markov,
    Localization,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub frame: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "frame-bounds")]
    pub suite: Vec<Suite>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// CSV output (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Lp,
    Phi,
    Heat,
    Seq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpaceKindArg {
    Besov,
    Tl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlavorArg {
    Classical,
    Tilde,
}

#[derive(Debug, Args)]
pub struct NormsArgs {
    pub frame: PathBuf,
    /// Test function: `random:seed=S[,band=B]`, `eigen:n=K`, `constant`, `sample:besov[,seed=S]`.
    #[arg(long = "f", default_value = "random:seed=1")]
    pub functions: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "1", allow_negative_numbers = true)]
    pub s: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub p: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub q: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "lp,heat,seq")]
    pub methods: Vec<MethodArg>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "besov")]
    pub spaces: Vec<SpaceKindArg>,
    #[arg(long, value_enum, default_value = "classical")]
    pub flavor: FlavorArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    pub frame: PathBuf,
    #[arg(long = "f", default_value = "sample:besov")]
    pub function: String,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 400)]
    pub nmax: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub frame: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// JSON output (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Outcome of a task that ran to completion.
pub enum Status {
    Pass,
    /// Invariants failed; the failure list has been written.
    Fail,
}

fn is_usage(err: &anyhow::Error) -> bool {
    match err.downcast_ref::<Error>() {
        Some(e) => matches!(
            e,
            Error::Config(_)
                | Error::Parameter(_)
                | Error::Format(_)
                | Error::Io(_)
                | Error::Index { .. }
                | Error::IndexMismatch
        ),
        None => err.downcast_ref::<std::io::Error>().is_some() || err.downcast_ref::<serde_json::Error>().is_some(),
    }
}

/// A closed stdout (for example `| head`) is not an error.
fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain()
        .filter_map(|c| c.downcast_ref::<std::io::Error>())
        .any(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    match cli.command {
        Command::Build(a) => build::run(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Norms(a) => tasks::norms(&a),
        Command::Approx(a) => tasks::approx(&a),
        Command::Report(a) => tasks::report(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    match run(cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage(&e) { 2 } else { 1 })
        }
    }
}
