//! `powersplit`: optimal and rule-based battery/supercapacitor power split
//! for drive cycles.
//!
//! Exit status is 0 on success, 1 when a controller or the solver fails on
//! valid input, and 2 for usage, config and input-file errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use powersplit::model::CycleKind;

#[derive(Debug, Parser)]
#[command(name = "powersplit", version, about = "Battery/supercapacitor power allocation over a known drive cycle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the energy-optimal allocation.
    Solve {
        cycle: PathBuf,
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Directory for optimal.csv, metrics.json and trace.csv.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a rule-based controller.
    Baseline {
        cycle: PathBuf,
        #[arg(long, value_enum)]
        controller: Controller,
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Directory for <controller>.csv and metrics.json.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run all three controllers on each cycle and tabulate battery usage.
    Compare {
        #[arg(required = true)]
        cycles: Vec<PathBuf>,
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Write compare.json here.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Time the solver on truncations of one synthetic cycle.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "250,500,1000")]
        horizons: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Kind::Mixed)]
        kind: Kind,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        config: Option<PathBuf>,
    },
    /// Write a synthetic drive cycle as CSV.
    GenCycle {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Length in seconds.
        #[arg(long)]
        duration: usize,
        #[arg(long)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Recompute metrics JSON from a trajectory CSV.
    Metrics {
        trajectory: PathBuf,
        /// Controller name used as the JSON key.
        #[arg(long, default_value = "controller")]
        name: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Controller {
    AllBattery,
    LowPass,
}

impl Controller {
    fn name(self) -> &'static str {
        match self {
            Controller::AllBattery => "all-battery",
            Controller::LowPass => "low-pass",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Urban,
    Highway,
    Mixed,
}

impl From<Kind> for CycleKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Urban => CycleKind::Urban,
            Kind::Highway => CycleKind::Highway,
            Kind::Mixed => CycleKind::Mixed,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { cycle, config, out } => commands::solve(&cycle, config.as_deref(), out.as_deref()),
        Command::Baseline { cycle, controller, config, out } => {
            commands::baseline(&cycle, controller, config.as_deref(), out.as_deref())
        }
        Command::Compare { cycles, config, out } => commands::compare(&cycles, config.as_deref(), out.as_deref()),
        Command::Bench { horizons, kind, seed, config } => commands::bench(&horizons, kind.into(), seed, config.as_deref()),
        Command::GenCycle { kind, duration, seed, out } => commands::gen_cycle(kind.into(), duration, seed, out.as_deref()),
        Command::Metrics { trajectory, name } => commands::metrics(&trajectory, &name),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.kind as u8)
        }
    }
}
