//! `cellshield` command-line interface.
//!
//! Exit codes: 0 success, 2 input error, 3 not computable, 4 degenerate grid.

mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use cellshield::{MethodSpec, SelectOptions, SolverOptions};
use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser)]
#[command(name = "cellshield", version, about = "Cellwise-robust regularized discriminant analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Points per grid axis.
    #[arg(long, default_value_t = 5)]
    grid_points: usize,
    /// Bound on the ADMM primal and dual residuals.
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
}

impl SolverArgs {
    fn options(&self) -> Result<SelectOptions, CliError> {
        if self.grid_points < 2 {
            return Err(CliError::Input("--grid-points must be at least 2".into()));
        }
        let solver = SolverOptions { tol: self.tol, max_iter: self.max_iter, ..SolverOptions::default() };
        solver.validate()?;
        Ok(SelectOptions { solver, grid_points: self.grid_points, ..SelectOptions::default() })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model on a labeled CSV and write `<prefix>_model.json` and `<prefix>_grid.csv`.
    Fit {
        #[arg(long)]
        method: MethodSpec,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "cellshield")]
        out_prefix: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Classify the rows of a CSV and write `<prefix>_predictions.csv`.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "cellshield")]
        out_prefix: PathBuf,
    },
    /// Flag outlying rows and cells; writes a CSV report and two SVG plots.
    Outliers {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "cellshield")]
        out_prefix: PathBuf,
    },
    /// Run the Monte Carlo comparison on a synthetic scenario.
    Simulate {
        #[arg(long, default_value_t = 1)]
        scenario: u8,
        /// Number of variables (defaults: 10 for scenario 1, 50 for scenario 2).
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 100)]
        replicates: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Comma-separated subset of methods; all twelve when omitted.
        #[arg(long, value_delimiter = ',')]
        method: Vec<MethodSpec>,
        #[arg(long, default_value = "cellshield")]
        out_prefix: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(value) = std::env::var("CELLSHIELD_THREADS") {
        let n: usize = value
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Input(format!("CELLSHIELD_THREADS must be a positive integer, got `{value}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Fit { method, input, out_prefix, solver } => {
            commands::fit(method, &input, &out_prefix, &solver.options()?)
        }
        Command::Predict { model, input, out_prefix } => commands::predict(&model, &input, &out_prefix),
        Command::Outliers { model, input, out_prefix } => commands::outliers(&model, &input, &out_prefix),
        Command::Simulate { scenario, dim, epsilon, replicates, seed, method, out_prefix, solver } => {
            let methods = if method.is_empty() { MethodSpec::all() } else { method };
            let args = commands::SimulateArgs { scenario, dim, epsilon, replicates, seed, methods };
            commands::simulate(&args, &out_prefix, &solver.options()?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
