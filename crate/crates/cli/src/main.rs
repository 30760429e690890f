//! CLI for multi-resolution spectral graph classification.
//!
//! Subcommands: `transform`, `train`, `cv`, `saliency`, `synth`, `inspect`.
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
//! failure. All state flows through flags and the config file; no
//! environment variables are consulted.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use config::Overrides;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lapwave", version, about = "Multi-resolution spectral graph classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Key-value config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for every random stream.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (1 = fully serial).
    #[arg(long)]
    workers: Option<usize>,
    /// Number of top edges to report.
    #[arg(long = "top-k")]
    top_k: Option<usize>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            config: self.config.clone(),
            seed: self.seed,
            out: self.out.clone(),
            workers: self.workers,
            top_k: self.top_k,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write single-scale representations of one graph plus a
    /// reconstruction-error report.
    Transform {
        /// Matrix file of the graph to transform.
        #[arg(long)]
        graph: PathBuf,
        /// Comma-separated scales (overrides transform.scales).
        #[arg(long)]
        scales: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Train on the full dataset and write metrics, history and a snapshot.
    Train {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Stratified k-fold cross-validation.
    Cv {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Edge saliency and top-k edges from a trained snapshot.
    Saliency {
        /// Trained model snapshot (params.json from `train`).
        #[arg(long)]
        snapshot: PathBuf,
        /// Optional `index,name` lookup applied to the top-k listing.
        #[arg(long)]
        names: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Generate a synthetic dataset from class templates.
    Synth {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print the fully resolved configuration.
    Inspect {
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// Error carrying the process exit code.
pub enum CliError {
    Config(Vec<String>),
    Core(lapwave::Error),
}

impl From<lapwave::Error> for CliError {
    fn from(e: lapwave::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn report_and_code(self) -> u8 {
        match self {
            CliError::Config(problems) => {
                eprintln!("configuration error:");
                for p in problems {
                    eprintln!("  - {p}");
                }
                2
            }
            CliError::Core(e) => {
                eprintln!("error: {e}");
                match e {
                    lapwave::Error::Numerical(_) => 4,
                    _ => 3,
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Transform {
            graph,
            scales,
            common,
        } => config::resolve(&common.overrides())
            .map_err(CliError::Config)
            .and_then(|cfg| commands::transform(&cfg, graph, scales.as_deref())),
        Command::Train { common } => config::resolve(&common.overrides())
            .map_err(CliError::Config)
            .and_then(|cfg| commands::train(&cfg)),
        Command::Cv { common } => config::resolve(&common.overrides())
            .map_err(CliError::Config)
            .and_then(|cfg| commands::cross_validate(&cfg)),
        Command::Saliency {
            snapshot,
            names,
            common,
        } => config::resolve(&common.overrides())
            .map_err(CliError::Config)
            .and_then(|cfg| commands::saliency(&cfg, snapshot, names.as_deref())),
        Command::Synth { common } => config::resolve(&common.overrides())
            .map_err(CliError::Config)
            .and_then(|cfg| commands::synth(&cfg)),
        Command::Inspect { common } => config::resolve(&common.overrides())
            .map_err(CliError::Config)
            .and_then(|cfg| commands::inspect(&cfg)),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => ExitCode::from(e.report_and_code()),
    }
}
