use std::io::{ErrorKind, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use galileo_cli::commands;
use galileo_cli::config::{Settings, OUT_DIR_ENV};
use galileo_cli::CliError;

/// Galilean-invariant conservation laws: verification suites, eigen-analysis,
/// Rusanov runs and frame-shift experiments.
///
/// Exit status: 0 success, 1 failed checks, 2 usage or configuration error,
/// 3 runtime abort.
#[derive(Parser)]
#[command(name = "galileo", version)]
struct Cli {
    /// key = value configuration file (flags take precedence)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suite and write report.csv / report.txt
    Check {
        /// Every registered system (the default when no --system is given)
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        settings: Settings,
    },
    /// Characteristic speeds at a state, against the closed form where known
    Eigen {
        #[command(flatten)]
        settings: Settings,
    },
    /// Solve an initial-value problem; write snapshots, entropy.csv and a plot script
    Evolve {
        #[command(flatten)]
        settings: Settings,
    },
    /// Compare a boosted run with the boost of a plain run on several grids
    Frameshift {
        #[command(flatten)]
        settings: Settings,
    },
    /// Evaluate a closure, its gradient and its convex conjugate
    Conjugate {
        #[command(flatten)]
        settings: Settings,
    },
}

fn run(cli: Cli, out: &mut String) -> Result<i32, CliError> {
    let file = cli.config.as_deref().map(Settings::from_file).transpose()?;
    let env_out = std::env::var(OUT_DIR_ENV).ok();
    let resolve = |flags: Settings| Settings::resolve(file.clone(), env_out.clone(), flags);
    match cli.command {
        Command::Check { all, settings } => commands::check(&resolve(settings), all, out),
        Command::Eigen { settings } => commands::eigen(&resolve(settings), out),
        Command::Evolve { settings } => commands::evolve(&resolve(settings), out),
        Command::Frameshift { settings } => commands::frameshift(&resolve(settings), out),
        Command::Conjugate { settings } => commands::conjugate(&resolve(settings), out),
    }
}

/// A closed pipe (`galileo ... | head`) is not an error; the exit status still
/// reflects the command.
fn flush(out: &str) {
    if let Err(e) = std::io::stdout().lock().write_all(out.as_bytes()) {
        if e.kind() != ErrorKind::BrokenPipe {
            eprintln!("galileo: stdout: {e}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let result = run(cli, &mut out);
    flush(&out);
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("galileo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
