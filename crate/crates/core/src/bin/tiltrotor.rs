use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tiltrotor::allocation::{allocation_consistency_report, matrix_csv, HoverTrim, ALLOCATION_MATRIX};
use tiltrotor::dynamics::VehicleParams;
use tiltrotor::harness::{self, log};
use tiltrotor::linearization;
use tiltrotor::position::hover_speed;
use tiltrotor::Error;

#[derive(Parser)]
#[command(name = "tiltrotor", about = "Tilt-rotor quadcopter attitude/position simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write the CSV log.
    Simulate {
        #[arg(long, required_unless_present = "batch")]
        config: Option<PathBuf>,
        /// Output CSV file, or output directory with --batch.
        #[arg(long)]
        out: PathBuf,
        /// Run every *.toml in this directory concurrently.
        #[arg(long, conflicts_with = "config")]
        batch: Option<PathBuf>,
    },
    /// Check the hover linearization against finite differences and the mixer against its channels.
    VerifyAllocation {
        /// Also write the coefficient table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print the 8×8 allocation matrix as CSV.
    DumpAllocation,
    /// Extract two columns of a log as CSV.
    PlotColumns {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "t")]
        x: String,
        #[arg(long)]
        y: String,
    },
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate { config, out, batch } => {
            if let Some(dir) = batch {
                let mut failed = 0;
                for (cfg, result) in harness::run_batch(&dir, &out)? {
                    match result {
                        Ok(path) => println!("{} -> {}", cfg.display(), path.display()),
                        Err(e) => {
                            failed += 1;
                            eprintln!("{}: {e}", cfg.display());
                        }
                    }
                }
                if failed > 0 {
                    return Err(Error::Config(format!("{failed} batch run(s) failed")));
                }
            } else if let Some(cfg) = config {
                let log = harness::simulate_file(&cfg, &out)?;
                println!("{} rows -> {}", log.rows.len(), out.display());
            }
        }
        Command::VerifyAllocation { csv } => {
            let params = VehicleParams::reference();
            let trim = HoverTrim::level(hover_speed(params.gravity, [0.0; 4], &params)?);
            let report = linearization::verify(&trim, &params)?;
            print!("{report}");
            print!("{}", allocation_consistency_report(&ALLOCATION_MATRIX));
            if let Some(path) = csv {
                std::fs::write(&path, report.to_csv()).map_err(|e| Error::Io {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
            }
            if !report.all_confirmed() {
                return Err(Error::Config("linearization coefficients disagree with the finite-difference oracle".into()));
            }
        }
        Command::DumpAllocation => print!("{}", matrix_csv(&ALLOCATION_MATRIX)),
        Command::PlotColumns { input, x, y } => {
            let pairs = log::plot_columns(&input, &x, &y)?;
            print!("{}", log::pairs_csv(&x, &y, &pairs));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
