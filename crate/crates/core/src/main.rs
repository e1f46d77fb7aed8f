use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qfim::catalog::CATALOG;
use qfim::report::{self, Fault, ModelSpecFile, EXIT_FAIL, EXIT_INPUT_ERROR};
use qfim::Error;

#[derive(Parser)]
#[command(name = "qfim", version, about = "Fisher information and pullback geometry of parametrized states")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Introduce a deliberate defect (negative-control runs only).
    #[arg(long, value_enum, global = true, hide = true)]
    inject_fault: Option<FaultArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute all quantities and checks for a model spec file.
    Compute {
        specfile: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every check suite on randomly drawn models.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Inspect the built-in model catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    FlipOmegaSign,
}

impl From<FaultArg> for Fault {
    fn from(f: FaultArg) -> Self {
        match f {
            FaultArg::FlipOmegaSign => Fault::FlipOmegaSign,
        }
    }
}

/// Input problems exit with 3; anything that went wrong during the
/// computation itself counts as a failed run.
fn error_exit(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    let code = match err {
        Error::Validation(_) | Error::Domain { .. } | Error::DimensionMismatch { .. } | Error::Parse(_) => {
            EXIT_INPUT_ERROR
        }
        _ => EXIT_FAIL,
    };
    ExitCode::from(code as u8)
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<(), ExitCode> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            ExitCode::from(EXIT_INPUT_ERROR as u8)
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let fault = cli.inject_fault.map(Fault::from);
    match cli.command {
        Command::Compute { specfile, out } => {
            let text = match fs::read_to_string(&specfile) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", specfile.display());
                    return ExitCode::from(EXIT_INPUT_ERROR as u8);
                }
            };
            let spec = match ModelSpecFile::from_json(&text) {
                Ok(s) => s,
                Err(e) => return error_exit(&e),
            };
            match report::run_with_fault(&spec, fault) {
                Ok(r) => {
                    if let Err(code) = write_output(out.as_ref(), &r.to_json()) {
                        return code;
                    }
                    for c in r.checks.iter().filter(|c| c.status >= report::Status::Warn) {
                        eprintln!("{}: {}", c.status, c.name);
                    }
                    ExitCode::from(r.exit_code() as u8)
                }
                Err(e) => error_exit(&e),
            }
        }
        Command::Verify { seed, count } => match report::verify_suite(seed, count, fault) {
            Ok(s) => {
                print!("{}", s.to_json());
                ExitCode::from(s.summary.exit_code as u8)
            }
            Err(e) => error_exit(&e),
        },
        Command::Catalog { action: CatalogAction::List } => {
            for (name, description) in CATALOG {
                println!("{name:<20} {description}");
            }
            ExitCode::SUCCESS
        }
    }
}
