//! `mixmc`: fit Bayesian mixture models by marginal-posterior Monte Carlo
//! and emit plot-ready CSV and JSON artifacts.

mod bench;
mod error;
mod fit;
mod inspect;
mod output;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "mixmc", version, about = "Marginal-posterior Monte Carlo for Bayesian mixture models")]
#[command(after_help = "Exit codes: 0 success, 1 runtime failure, 2 configuration error, 3 data error.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the posterior over (k, z) and write run artifacts.
    ///
    /// Files written to --out: metadata.json (resolved parameters, seed,
    /// random stream, autocorrelation report); k_posterior.csv (k,
    /// probability, weight); trace.csv (chain, sweep, k, log_likelihood,
    /// log_posterior, dwell); components.csv (highest-posterior state);
    /// map_assignment.csv (observation, component; 1-based); levels.csv for
    /// categorical data (question, code, level); fitted_pmf.csv for Poisson
    /// data (x, empirical, fitted); assignments.csv with
    /// --record-assignments (chain, sweep, dwell, then one 1-based label per
    /// observation); consensus.csv with --consensus (N x N matrix).
    Fit(fit::FitArgs),
    /// Recompute autocorrelation times and the k posterior from a fit
    /// directory; writes diagnostics.json.
    Diagnose {
        /// Directory written by `fit`.
        run: PathBuf,
    },
    /// Per-question mutual information (bits) between class assignment and
    /// responses, averaged over recorded assignments; writes mi.csv
    /// (question, name, mi_bits) sorted by decreasing information.
    Mi {
        /// Directory written by `fit --record-assignments` on categorical data.
        run: PathBuf,
    },
    /// Consensus matrix and optional spectral clustering of it.
    ///
    /// Uses consensus.csv from the run if present, otherwise rebuilds it
    /// from assignments.csv. With --k, writes spectral.csv (observation,
    /// label, v1, v2; labels 1-based).
    Consensus(inspect::ConsensusArgs),
    /// Generate a synthetic dataset with known labels.
    Synth(synth::SynthArgs),
    /// Time per sweep and mixing time on synthetic Gaussian data.
    Bench(bench::BenchArgs),
}

/// Data ingestion flags shared by commands that read raw data.
#[derive(Args, Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct IngestArgs {
    /// Column to read for single-column data, by header name or 0-based index.
    #[arg(long)]
    pub column: Option<String>,
    /// The first row is a header.
    #[arg(long, conflicts_with = "no_header")]
    pub header: bool,
    /// The first row is data.
    #[arg(long)]
    pub no_header: bool,
    /// Map missing categorical cells to an extra response category.
    #[arg(long)]
    pub missing_as_category: bool,
    /// Cell value treated as missing, besides the empty cell.
    #[arg(long)]
    pub missing_sentinel: Option<String>,
}

impl IngestArgs {
    pub fn options(&self) -> mixmc_core::IngestOptions {
        mixmc_core::IngestOptions {
            header: if self.header {
                Some(true)
            } else if self.no_header {
                Some(false)
            } else {
                None
            },
            column: self.column.clone(),
            missing_as_category: self.missing_as_category,
            missing_sentinel: self.missing_sentinel.clone(),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Poisson,
    Categorical,
    Null,
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit(args) => fit::run(&args),
        Command::Diagnose { run } => inspect::diagnose(&run),
        Command::Mi { run } => inspect::mutual_information(&run),
        Command::Consensus(args) => inspect::consensus(&args),
        Command::Synth(args) => synth::run(&args),
        Command::Bench(args) => bench::run(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code as u8)
        }
    }
}
