//! The `ncs` command-line tool.
//!
//! Every command writes its outputs plus a JSON [`RunManifest`] recording
//! the resolved parameters. Exit codes: 0 success, 2 usage error, 3 data or
//! format error, 4 numerical divergence.

mod commands;
mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use manifest::RunManifest;

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_DIVERGENCE: i32 = 4;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "NCS_THREADS";

#[derive(Parser, Debug)]
#[command(name = "ncs", version, about = "Near-circulant splitting for tomographic reconstruction")]
pub struct Cli {
    /// Log more (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rasterize an ellipse phantom.
    Phantom(PhantomArgs),
    /// Project an image and add noise.
    Simulate(SimulateArgs),
    /// Reconstruct an image from a sinogram.
    Reconstruct(ReconstructArgs),
    /// Compare solvers on a problem file against a common reference.
    Bench(BenchArgs),
    /// Fit a circulant mask to the normal operator of a geometry.
    EstimateMask(EstimateMaskArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct PhantomArgs {
    /// Image side N (overrides the spec file's size).
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// JSON ellipse list `{"size"?, "ellipses": [...]}`; Shepp–Logan if absent.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Also write an 8-bit PGM preview.
    #[arg(long)]
    pub pgm: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryArg {
    Parallel,
    Fan,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = GeometryArg::Parallel)]
    pub geometry: GeometryArg,
    /// Projection angles (fan beam: source positions).
    #[arg(long, default_value_t = 60)]
    pub angles: usize,
    /// Detector bins (fan beam: rays per view); smallest covering odd
    /// count when absent.
    #[arg(long)]
    pub detectors: Option<usize>,
    /// Fan-beam source distance from the image center (default N).
    #[arg(long)]
    pub source_radius: Option<f64>,
    /// Fan-beam opening angle in radians (default: covers the image).
    #[arg(long)]
    pub fan_angle: Option<f64>,
    /// `gaussian:SIGMA` or `poisson:SCALE`.
    #[arg(long, default_value = "gaussian:0")]
    pub noise: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverArg {
    Ncs,
    Pdhg,
    Admm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Ct,
    Pet,
}

#[derive(Args, Debug, Serialize)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub sino: PathBuf,
    #[arg(long, value_enum, default_value_t = SolverArg::Ncs)]
    pub solver: SolverArg,
    #[arg(long, value_enum, default_value_t = ModelArg::Ct)]
    pub model: ModelArg,
    /// Dual step α.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// TV scaling β; the gradient block carries weight β/α.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Identity shift γ of the metric (NCS, PDHG).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// TV weight λ.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// DC entry H₁₁ of the data mask (NCS with `--mask auto`).
    #[arg(long)]
    pub dc: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    /// Add the constraint x ≥ 0.
    #[arg(long)]
    pub positivity: bool,
    /// Weight of the x ≥ 0 block.
    #[arg(long, default_value_t = crate::models::DEFAULT_POSITIVITY_WEIGHT)]
    pub positivity_weight: f64,
    /// `auto` or a mask file approximating EᵀE.
    #[arg(long, default_value = "auto")]
    pub mask: String,
    /// CG iterations per ADMM outer loop.
    #[arg(long)]
    pub n_cg: Option<usize>,
    /// Probes for mask fitting.
    #[arg(long, default_value_t = crate::models::DEFAULT_MASK_SAMPLES, value_parser = positive_count)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// PET exposure scale (default: from the sinogram's noise metadata).
    #[arg(long)]
    pub exposure: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    /// Length of an NCS reference run for the `rel_subopt` column.
    #[arg(long)]
    pub ref_iters: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub pgm: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct BenchArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Comma-separated subset of ncs,pdhg,admm.
    #[arg(long, default_value = "ncs,pdhg,admm")]
    pub solvers: String,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    /// Reference length (default 50 × iters).
    #[arg(long)]
    pub ref_iters: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorArg {
    Parallel,
    Fan,
    File,
}

#[derive(Args, Debug, Serialize)]
pub struct EstimateMaskArgs {
    #[arg(long, value_enum)]
    pub operator: OperatorArg,
    /// Image side N (parallel and fan).
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long, default_value_t = 60)]
    pub angles: usize,
    #[arg(long)]
    pub detectors: Option<usize>,
    /// Sparse operator file (`--operator file`).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// The matrix file already holds the normal operator.
    #[arg(long)]
    pub normal: bool,
    #[arg(long, default_value_t = crate::models::DEFAULT_MASK_SAMPLES, value_parser = positive_count)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn positive_count(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Divergence { .. } | Error::DominanceViolation { .. } => EXIT_DIVERGENCE,
        Error::InvalidParameter { .. } => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
}

fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    init_logging(cli.verbose);
    init_threads();
    match commands::dispatch(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
