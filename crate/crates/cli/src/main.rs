//! Command-line front end for storage allocation analysis and simulation.

mod analyze;
mod compare;
mod output;
mod simulate;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "storalloc", version, about = "Storage allocation for delay-tolerant recovery: analysis and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate expected delay over a budget grid.
    Analyze(analyze::AnalyzeArgs),
    /// Optimal symmetric spreading for one budget.
    Optimize(analyze::OptimizeArgs),
    /// Random-waypoint experiment sweep.
    Simulate(simulate::SimulateArgs),
    /// Experiment sweep driven by a mobility trace.
    Replay(simulate::ReplayArgs),
    /// Empirical delays against the analytic distribution.
    Compare(compare::CompareArgs),
    /// Write a synthetic mobility trace.
    SynthTrace(simulate::SynthTraceArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(a) => analyze::analyze(a),
        Command::Optimize(a) => analyze::optimize(a),
        Command::Simulate(a) => simulate::simulate(a),
        Command::Replay(a) => simulate::replay(a),
        Command::Compare(a) => compare::compare(a),
        Command::SynthTrace(a) => simulate::synth_trace(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
