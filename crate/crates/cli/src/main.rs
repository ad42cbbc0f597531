//! Command-line front door for the binary-tree spectral experiments.
//!
//! Every command validates its configuration, writes JSON/CSV artifacts into
//! the output directory, prints one line per invariant check, and exits
//! nonzero when any check fails (failures enumerated on standard error).

mod commands;
mod config;
mod output;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::Check;
use config::{CommonArgs, RunConfig};

#[derive(Parser)]
#[command(
    name = "treespec",
    version,
    about = "Spectral experiments on truncated binary-tree Laplacians: Haar decomposition, conjugate operator, commutator positivity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Haar bases, subspace projectors and the level operator, with dumps.
    Decompose {
        #[command(flatten)]
        common: CommonArgs,
        /// Dump only this sphere's Haar basis and level-operator block.
        #[arg(long)]
        sphere: Option<usize>,
    },
    /// Eigenvalue census against the closed-form chain spectra.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Conjugate-operator builds, row-sum bounds, commutator identity.
    Commutator {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Potential decay profiles.
    Decay {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Localized commutator positivity experiment; writes report.json.
    Mourre {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// The whole suite in one output directory.
    All {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(checks) => {
            let failures: Vec<&Check> = checks.iter().filter(|c| !c.passed()).collect();
            for check in &checks {
                if check.passed() {
                    println!(
                        "[ok]   {}: {:e} (tolerance {:e})",
                        check.name, check.value, check.tolerance
                    );
                }
            }
            if failures.is_empty() {
                std::process::exit(0);
            }
            for check in &failures {
                eprintln!(
                    "[FAIL] {}: {:e} exceeds tolerance {:e}",
                    check.name, check.value, check.tolerance
                );
            }
            eprintln!("{} invariant check(s) failed", failures.len());
            std::process::exit(1);
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> Result<Vec<Check>> {
    match cli.command {
        Command::Decompose { common, sphere } => {
            let config = RunConfig::resolve(&common)?;
            commands::decompose(&config, sphere)
        }
        Command::Spectrum { common } => {
            let config = RunConfig::resolve(&common)?;
            commands::spectrum(&config)
        }
        Command::Commutator { common } => {
            let config = RunConfig::resolve(&common)?;
            commands::commutator(&config)
        }
        Command::Decay { common } => {
            let config = RunConfig::resolve(&common)?;
            commands::decay(&config)
        }
        Command::Mourre { common } => {
            let config = RunConfig::resolve(&common)?;
            commands::mourre(&config)
        }
        Command::All { common } => {
            let config = RunConfig::resolve(&common)?;
            commands::all(&config)
        }
    }
}
