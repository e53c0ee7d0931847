//! Command-line front end.
//!
//! ```text
//! svc-cache solve    --config <path> --out <path> [--csv <path>] [--quantum-mult k] [--early-stop]
//! svc-cache simulate --config <path> --solution <path> [--trials N] [--seed S] --out <path>
//! svc-cache sweep    --config <path> --axis <n_sbs|cache_bytes|sbs_snr_db> --values <list>
//!                    --strategies <list> [--trials N] [--seed S] --out <path>
//! ```
//!
//! Exit status is 0 on success, 1 for usage and configuration errors and 2
//! for runtime failures.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_simulate, cmd_solve, cmd_sweep, csv_path_for, evaluate_strategies, run_simulate, run_solve, run_sweep,
    solve_csv, solve_proposed, sweep_csv, AnalyticSummary, SimulationDocument, SolveOutput, SolverOverrides, Strategy,
    SweepAxis, SweepRow, SOLVE_CSV_HEADER, SWEEP_CSV_HEADER,
};
pub use config::{ClusterSpec, Experiment, ExperimentConfig, LibrarySpec, QoeSpec, SimSpec, SolverSpec};

use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "svc-cache", version, about = "QoE-optimal SVC cache placement for small-cell clusters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the optimal placement and write the solution JSON and per-video CSV.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-video CSV; defaults to the solution path with a .csv extension.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        quantum_mult: Option<u32>,
        #[arg(long)]
        early_stop: bool,
    },
    /// Estimate QoE, hit ratio and stall probability of a solution by Monte Carlo.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate strategies along one parameter axis and write a CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        axis: SweepAxis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// e.g. proposed,dmp@4.8,mhr@10.4
        #[arg(long, value_delimiter = ',', required = true)]
        strategies: Vec<String>,
        /// Simulated requests per row; 0 reports analytic values.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        quantum_mult: Option<u32>,
        #[arg(long)]
        early_stop: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter { .. }
        | Error::NotOnLadder { .. }
        | Error::NotAMultiple { .. }
        | Error::Schema(_)
        | Error::Json { .. } => 1,
        Error::Io { .. } | Error::EnumerationTooLarge { .. } | Error::CapacityOverflow { .. } => 2,
    }
}

pub fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Solve {
            config,
            out,
            csv,
            quantum_mult,
            early_stop,
        } => {
            let res = cmd_solve(&config, &out, csv.as_deref(), SolverOverrides { quantum_mult, early_stop })?;
            eprintln!(
                "cached {} videos (m_hat {}), objective {:.6}, {} demotions",
                res.solution.cached_count(),
                res.document.m_hat,
                res.document.objective,
                res.document.demotions.len()
            );
        }
        Command::Simulate {
            config,
            solution,
            trials,
            seed,
            out,
        } => {
            let doc = cmd_simulate(&config, &solution, trials, seed, &out)?;
            eprintln!(
                "avg QoE {:.6} ± {:.6} (analytic {:.6}), hit ratio {:.6}",
                doc.report.avg_qoe, doc.report.avg_qoe_se, doc.analytic.objective, doc.report.hit_ratio
            );
        }
        Command::Sweep {
            config,
            axis,
            values,
            strategies,
            trials,
            seed,
            quantum_mult,
            early_stop,
            out,
        } => {
            let rows = cmd_sweep(
                &config,
                axis,
                &values,
                &strategies,
                trials,
                seed,
                SolverOverrides { quantum_mult, early_stop },
                &out,
            )?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
        }
    }
    Ok(())
}

/// Parses `args` and runs the command, returning the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
