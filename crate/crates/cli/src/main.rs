use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;

/// Accessible lasso models: solver, face tests, face-count bounds and
/// selection-error simulations.
#[derive(Debug, Parser)]
#[command(name = "alasso", version, about)]
struct Cli {
    /// Worker threads for parallel commands (overrides ALASSO_THREADS).
    #[arg(long, global = true, env = "ALASSO_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Design matrix CSV (rows are observations, header optional).
    #[arg(long)]
    pub design: PathBuf,
    /// Rescale every column to unit Euclidean norm before use.
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Coordinate-descent tolerance, relative to max(1, lambda_max).
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Maximum number of coordinate sweeps.
    #[arg(long, default_value_t = 200_000)]
    pub max_iters: usize,
    /// Tolerance of the reported KKT check.
    #[arg(long, default_value_t = 1e-6)]
    pub kkt_tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the lasso at one lambda.
    Solve {
        #[command(flatten)]
        design: DesignArgs,
        /// Response vector CSV (one column or one row).
        #[arg(long)]
        response: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Warm-started lasso path over a log-spaced lambda grid.
    Path {
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long)]
        response: PathBuf,
        /// Grid size; defaults to 10p.
        #[arg(long)]
        grid_size: Option<usize>,
        /// Smallest lambda as a fraction of lambda_max.
        #[arg(long, default_value_t = 1e-3)]
        ratio: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Project a response onto the null-model polytope and compare the
    /// residual with the lasso fit.
    Project {
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long)]
        response: PathBuf,
        #[arg(long)]
        lambda: f64,
    },
    /// Decide whether a signed model spans a face of the hull.
    CheckFace {
        #[command(flatten)]
        design: DesignArgs,
        /// Signed model JSON, e.g. {"p":3,"signed":[[1,"+"],[3,"-"]]}.
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
    },
    /// List every accessible model (n <= 4, 2p <= 16).
    Enumerate {
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Largest model size to search; defaults to n.
        #[arg(long)]
        max_size: Option<usize>,
    },
    /// Tally lasso supports for responses drawn uniformly on a sphere.
    Sample {
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Sphere radius as a multiple of lambda.
        #[arg(long, default_value_t = 100.0)]
        radius_factor: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Face counts and bounds for (n, p[, k]) or growth constants for (rho, kappa).
    Bounds {
        /// Observations; with --rho also selects the bound comparison at p = round(rho n).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, requires = "n")]
        p: Option<usize>,
        /// Model size for the size-k bound.
        #[arg(long, requires = "p")]
        k: Option<usize>,
        #[arg(long, requires = "kappa")]
        rho: Option<f64>,
        #[arg(long, requires = "rho")]
        kappa: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
    },
    /// Best selection error along the lasso path over random replicates.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        k: usize,
        /// Pairwise feature correlation; 0 gives the iid design.
        #[arg(long)]
        corr: Option<f64>,
        #[arg(long, default_value_t = 10.0)]
        signal: f64,
        #[arg(long, default_value_t = 1.0)]
        noise_sd: f64,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Lambda grid size per path; defaults to 10p.
        #[arg(long)]
        grid_size: Option<usize>,
        /// Draw coefficient signs at random instead of all positive.
        #[arg(long)]
        random_signs: bool,
        /// Per-replicate CSV (replicate,best_error,argmin_lambda).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Summary JSON file.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Selection error at every lambda of one path.
    PathDemo {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 240)]
        p: usize,
        #[arg(long, default_value_t = 90)]
        k: usize,
        #[arg(long, default_value_t = 10.0)]
        signal: f64,
        #[arg(long, default_value_t = 1.0)]
        noise_sd: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        grid_size: Option<usize>,
        /// Per-lambda CSV (lambda,support_size,error); without it the series
        /// is included in the JSON payload.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(cli.command) {
        Ok(envelope) => match output::print(&envelope) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
