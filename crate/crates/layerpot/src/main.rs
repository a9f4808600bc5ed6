use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use layerpot::commands::{self, SolveOptions};
use layerpot::{CliError, RunConfig};

/// Single-layer potential solver for closed surfaces.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble and solve one system and print density statistics.
    Solve {
        #[arg(short, long)]
        config: PathBuf,
        /// Refinement level: the grid is `n·2^level` by `k·2^level`.
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// Write the matrix and right-hand side as a binary dump.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Write the density coefficients as CSV.
        #[arg(long)]
        density_out: Option<PathBuf>,
        /// Also report symmetry, conditioning, mu_hat and Hadamard dominance.
        #[arg(long)]
        diagnostics: bool,
    },
    /// Run a convergence study and write the CSV report.
    Study {
        #[arg(short, long)]
        config: PathBuf,
        /// Overrides `[output] csv_path`; without either the CSV goes to stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Exit with status 4 when an acceptance threshold is missed.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        diagnostics: bool,
    },
    /// Evaluate the potential of a stored density at points off the surface.
    EvalPotential {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        density: PathBuf,
        /// CSV of `x,y,z` rows.
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 0)]
        level: usize,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Solve {
            config,
            level,
            dump,
            density_out,
            diagnostics,
        } => {
            let cfg = RunConfig::load(&config)?;
            let opts = SolveOptions {
                level,
                dump,
                density_out,
                diagnostics,
            };
            commands::solve(&cfg, &opts, &mut out)?;
        }
        Command::Study {
            config,
            csv,
            check,
            diagnostics,
        } => {
            let cfg = RunConfig::load(&config)?;
            let mut err = std::io::stderr();
            commands::study(&cfg, csv.as_deref(), check, diagnostics, &mut out, &mut err)?;
        }
        Command::EvalPotential {
            config,
            density,
            points,
            level,
        } => {
            let cfg = RunConfig::load(&config)?;
            commands::eval_potential_file(&cfg, level, &density, &points, &mut out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
