use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chaplygin_cli::commands::{bracket_tables, simulate, verify, write_file};
use chaplygin_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "chaplygin",
    version,
    about = "Rolling-sphere simulation and bracket verification"
)]
struct Cli {
    /// Config file of `key = value` lines applied over the built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one key; may be repeated. Applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured model and write the trajectory.
    Simulate {
        /// Trajectory file; standard output when neither this nor `output` is set.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run verification checks and write the report.
    Verify {
        /// all, jacobi, casimir, nonintegrability, alpha, dynamics, commute,
        /// measure, consistency, conservation or rescaled.
        #[arg(default_value = "all")]
        which: String,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the standard, affine and scaled coefficient tables at the configured state.
    BracketTable,
    /// Print the effective configuration.
    Config,
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let (cfg, raw) = RunConfig::load(cli.config.as_deref(), &cli.set)?;
    match cli.command {
        Command::Simulate { output } => {
            let csv = simulate(&cfg)?.to_csv();
            match output.or(cfg.output) {
                Some(path) => write_file(&path, &csv)?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { which, report } => {
            let result = verify(&cfg, &which)?;
            let text = result.to_text();
            print!("{text}");
            if let Some(path) = report.or(cfg.report) {
                write_file(&path, &text)?;
            }
            for failure in result.failures() {
                if !failure.detail.is_empty() {
                    eprintln!("{}: {}", failure.name, failure.detail);
                }
            }
            Ok(if result.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::BracketTable => {
            print!("{}", bracket_tables(&cfg));
            Ok(ExitCode::SUCCESS)
        }
        Command::Config => {
            print!("{}", raw.to_text());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
