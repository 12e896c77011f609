//! `ibcurve`: information-plane scans, closed-form constructs and bound
//! checks for finite joint distributions.
//!
//! Exit codes: 0 success, 1 invalid input, 2 partial output or solver/bound failure.

mod commands;
mod grid;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ibcurve_core::solvers::{DEFAULT_DAMPING, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS, DEFAULT_TOL};
use ibcurve_core::{Error, Objective, SolverConfig};

#[derive(Debug, Parser)]
#[command(name = "ibcurve", version, about = "Information-bottleneck curves and perturbation bounds")]
pub struct Cli {
    /// Worker threads for concurrent solves (default: available parallelism).
    #[arg(long, global = true, env = "IBCURVE_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan an objective over a β grid.
    Curve(CurveArgs),
    /// Closed-form points for a deterministic joint.
    Analytic(AnalyticArgs),
    /// Check the perturbation bounds on randomized perturbations of a deterministic joint.
    Verify(VerifyArgs),
    /// Synthetic end-to-end demonstration.
    Demo(DemoArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Bottleneck alphabet size (default |X| + 1).
    #[arg(long)]
    t_card: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long, default_value_t = DEFAULT_DAMPING)]
    damping: f64,
}

impl SolverArgs {
    fn config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            beta: 0.0,
            t_cardinality: self.t_card,
            max_iters: self.max_iters,
            tol: self.tol,
            restarts: self.restarts,
            seed,
            damping: self.damping,
        }
    }
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Joint distribution (CSV or JSON).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "ib-lagrangian")]
    objective: Objective,
    /// Linearly spaced grid `lo:hi:n`.
    #[arg(long)]
    beta_lin: Option<String>,
    /// Log-spaced grid `lo:hi:n`.
    #[arg(long)]
    beta_log: Option<String>,
    /// `lo:hi:n`, log-spaced for the squared objectives and linear otherwise.
    #[arg(long)]
    beta_grid: Option<String>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, env = "IBCURVE_SEED", default_value_t = 0)]
    seed: u64,
    /// Scan table (CSV).
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON mirror of the scan.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Embed the encoder of every point in the JSON mirror.
    #[arg(long, requires = "json")]
    with_encoders: bool,
}

#[derive(Debug, Args)]
#[group(id = "construct", required = true, multiple = false)]
pub struct AnalyticChoice {
    /// Erasure family at N evenly spaced α in [0, 1].
    #[arg(long)]
    talpha_grid: Option<usize>,
    /// Step envelope of the hard clusterings.
    #[arg(long)]
    dib_envelope: bool,
    /// Every hard clustering, exactly evaluated.
    #[arg(long)]
    hard_front: bool,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    choice: AnalyticChoice,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated subset of a1, a2, a3, a4, a5, issue3.
    #[arg(long, default_value = "a1,a2,issue3")]
    theorems: String,
    /// Comma-separated ℓ1 distances, each at most 1/2.
    #[arg(long)]
    eps: String,
    /// Perturbations per (theorem, ε).
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, env = "IBCURVE_SEED", default_value_t = 0)]
    seed: u64,
    /// Lagrangian weights for the a4 checks.
    #[arg(long, default_value = "0.25,0.5,0.75")]
    beta: String,
    /// Compression levels for a3/a5, as fractions of H(Y).
    #[arg(long, default_value = "0.25,0.5,0.75,1")]
    r_fractions: String,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 10)]
    classes: usize,
    /// Total number of inputs, spread evenly over the classes.
    #[arg(long, default_value_t = 100)]
    inputs: usize,
    #[arg(long, env = "IBCURVE_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    /// Directory for the joint, plane table, summary and manifest.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    manifest: PathBuf,
}

/// How a command finished when it did not hit an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Outputs written, but some points failed or some bound was violated.
    Partial,
}

fn init_workers(workers: Option<usize>) -> Result<(), Error> {
    if let Some(n) = workers {
        if n == 0 {
            return Err(Error::InvalidInput("--workers must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
    }
    Ok(())
}

pub fn run(argv: Vec<String>) -> Result<Outcome, Error> {
    let cli = Cli::try_parse_from(std::iter::once("ibcurve".to_string()).chain(argv.iter().cloned()))
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    match cli.command {
        Command::Curve(a) => commands::curve(&a, &argv),
        Command::Analytic(a) => commands::analytic(&a, &argv),
        Command::Verify(a) => commands::verify(&a, &argv),
        Command::Demo(a) => commands::demo(&a, &argv),
        Command::Replay(a) => {
            let m = manifest::RunManifest::read(&a.manifest)?;
            if m.tool_version != manifest::TOOL_VERSION {
                eprintln!(
                    "warning: manifest written by version {}, running {}",
                    m.tool_version,
                    manifest::TOOL_VERSION
                );
            }
            if m.argv.first().is_some_and(|c| c == "replay") {
                return Err(Error::InvalidInput("a manifest cannot replay another replay".into()));
            }
            run(m.argv)
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse_from(std::env::args()) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // help and version are not errors
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(e) = init_workers(cli.workers) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(argv) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
