//! Batch driver for conditional fixed point problems: reads a JSON problem
//! file, runs the requested operation, and emits a reproducible report.
//!
//! Exit codes: 0 on success or convergence, 2 when a solve stops on its
//! round limit, 1 on any parse, validation, or runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod expr;
mod problem;
mod report;
mod run;

#[derive(Parser)]
#[command(name = "condfix", version, about = "Fixed points of local maps, one atom at a time")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct IoArgs {
    /// Problem file (JSON).
    problem: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override the residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Override the round limit.
    #[arg(long)]
    max_rounds: Option<usize>,
    /// Override the subdivision cell budget.
    #[arg(long)]
    cell_budget: Option<usize>,
}

impl IoArgs {
    fn flags(&self) -> run::CommonFlags {
        run::CommonFlags {
            output: self.output.clone(),
            tol: self.tol,
            max_rounds: self.max_rounds,
            cell_budget: self.cell_budget,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve f(Y) = Y on the problem's geometry.
    Solve {
        #[command(flatten)]
        io: IoArgs,
        /// Attach an oracle comparison, e.g. `grid:1000`.
        #[arg(long)]
        oracle: Option<String>,
        /// Mirror the diameter trace to a CSV file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Find the preimage of `target` under f on an interval.
    Ivt {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Dump the cells of the depth-fold barycentric subdivision.
    Subdivide {
        #[command(flatten)]
        io: IoArgs,
        /// Subdivision depth.
        #[arg(long, default_value_t = 1)]
        depth: usize,
    },
    /// Dump canonical labels of all subdivision vertices.
    Label {
        #[command(flatten)]
        io: IoArgs,
        /// Subdivision depth.
        #[arg(long, default_value_t = 1)]
        depth: usize,
    },
    /// Emit the per-atom count of completely labeled cells as CSV.
    AuditParity {
        #[command(flatten)]
        io: IoArgs,
        /// Subdivision depth.
        #[arg(long, default_value_t = 1)]
        depth: usize,
    },
    /// Project the problem's query point onto its geometry.
    Project {
        #[command(flatten)]
        io: IoArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { io, oracle, trace } => {
            run::solve(&io.problem, &io.flags(), oracle.as_deref(), trace.as_deref())
        }
        Command::Ivt { io } => run::ivt(&io.problem, &io.flags()),
        Command::Subdivide { io, depth } => run::subdivide(&io.problem, &io.flags(), *depth),
        Command::Label { io, depth } => run::label(&io.problem, &io.flags(), *depth),
        Command::AuditParity { io, depth } => run::audit_parity(&io.problem, &io.flags(), *depth),
        Command::Project { io } => run::project_point(&io.problem, &io.flags()),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(run::EXIT_ERROR as u8)
        }
    }
}
