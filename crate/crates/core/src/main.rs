use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use jjarray::cli::{self, CliError, RunOptions};
use jjarray::Execution;

#[derive(Parser)]
#[command(
    name = "jjarray",
    version,
    about = "Spectra and spin models of interferometer-array qubits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a JSON configuration.
    Run {
        config: PathBuf,
        /// Worker threads (default: logical cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Output path prefix, overriding the configuration.
        #[arg(long)]
        out: Option<String>,
        /// Evaluate grid points one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Check a configuration without computing anything.
    Validate { config: PathBuf },
    /// Compare numerical and closed-form inverse capacitance matrices.
    Capmat {
        #[arg(short = 'N', long = "loops")]
        n: usize,
        #[arg(long)]
        cb: f64,
        #[arg(long)]
        cs: f64,
    },
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match args.command {
        Command::Run {
            config,
            workers,
            out,
            sequential,
        } => {
            let opts = RunOptions {
                workers,
                out,
                execution: if sequential {
                    Execution::Sequential
                } else {
                    Execution::Parallel
                },
            };
            match cli::run(&config, &opts) {
                Ok(r) => {
                    println!("wrote {} ({} rows)", r.csv.display(), r.rows);
                    println!("wrote {}", r.plot.display());
                    println!("wrote {}", r.meta.display());
                    if r.all_converged {
                        ExitCode::SUCCESS
                    } else {
                        eprintln!(
                            "warning: some points did not converge (see the `converged` column)"
                        );
                        ExitCode::from(cli::EXIT_NOT_CONVERGED as u8)
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::Validate { config } => match cli::validate(&config) {
            Ok(_) => {
                println!("ok");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Capmat { n, cb, cs } => match cli::capmat_text(n, cb, cs) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
    }
}
