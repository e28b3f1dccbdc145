use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use opuc::config::ExperimentConfig;
use opuc::error::{Falsification, Result, RunError};
use opuc::experiments::{self, RunSummary, ORACLE_TOLERANCE};
use opuc::formats;
use opuc::presets::{self, PRESET_NAMES};

/// Randomized Verblunsky parameter laboratory.
///
/// Exit status: 0 all checks passed, 1 an invariant was falsified,
/// 2 invalid configuration, 3 degree budget exceeded, 4 other errors.
#[derive(Parser)]
#[command(name = "opuc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a configuration file.
    Run { config: PathBuf },
    /// Run a named preset.
    Preset {
        name: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the preset's configuration instead of running it.
        #[arg(long)]
        print: bool,
    },
    /// List preset names.
    Presets,
    /// Compare certified sups of two configurations at shared checkpoints.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Write the table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Orthogonality canary on random parameters of modulus at most 0.9.
    Oracle {
        #[arg(long = "n", default_values_t = [4usize, 8, 16, 32])]
        degrees: Vec<usize>,
        #[arg(long, default_value_t = presets::DEFAULT_SEED)]
        seed: u64,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::parse(&text)
}

fn report(summary: &RunSummary) {
    for f in &summary.files {
        eprintln!("wrote {}", f.display());
    }
    if let Some(r) = summary.manifest.plateau_ratio {
        eprintln!("plateau ratio {r:.4}");
    }
    for note in &summary.manifest.notes {
        eprintln!("note: {note}");
    }
    for f in &summary.failures {
        eprintln!("FALSIFIED {f}");
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { config } => {
            let summary = experiments::run(&load(&config)?)?;
            report(&summary);
            summary.into_result().map(drop)
        }
        Command::Preset {
            name,
            seed,
            out,
            print,
        } => {
            let config = presets::preset(&name, seed, out).ok_or_else(|| {
                RunError::Config(format!(
                    "unknown preset `{name}`; expected one of {}",
                    PRESET_NAMES.join(", ")
                ))
            })?;
            if print {
                print!("{}", config.to_text());
                return Ok(());
            }
            let summary = experiments::run(&config)?;
            report(&summary);
            summary.into_result().map(drop)
        }
        Command::Presets => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
            Ok(())
        }
        Command::Compare { a, b, out } => {
            let rows = experiments::compare_regimes(&load(&a)?, &load(&b)?)?;
            match out {
                Some(path) => formats::write_csv(&path, &rows),
                None => formats::write_csv_to(io::stdout().lock(), &rows),
            }
        }
        Command::Oracle { degrees, seed } => {
            let rows = experiments::oracle_rows(seed, &degrees)?;
            formats::write_csv_to(io::stdout().lock(), &rows)?;
            match rows
                .iter()
                .find(|r| r.defect.is_nan() || r.defect > ORACLE_TOLERANCE)
            {
                Some(r) => Err(RunError::Falsified(Falsification {
                    suite: "oracle",
                    invariant: format!("‖Gram − I‖ = {:e}", r.defect),
                    seed,
                    trajectory: 0,
                    degree: r.n as u64,
                })),
                None => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
