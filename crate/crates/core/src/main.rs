use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use s4gauss::cli::commands::{EXIT_CONFIG, EXIT_FAILURE};
use s4gauss::cli::{run_command, threads_from_env, Command, Overrides};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Fundamental data, curvatures and residuals per node.
    Analyze,
    /// Tension of the Gauss map and the harmonicity verdict.
    Tension,
    /// Associated family members for the configured lambdas.
    Family,
    /// Normal energy, Willmore energy and the genus bound.
    Energy,
    /// Full residual suite; exit 0 on pass, 1 on failure.
    Verify,
    /// Built-in surfaces with closed-form reference values.
    Catalog,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Analyze => Command::Analyze,
            Cmd::Tension => Command::Tension,
            Cmd::Family => Command::Family,
            Cmd::Energy => Command::Energy,
            Cmd::Verify => Command::Verify,
            Cmd::Catalog => Command::Catalog,
        }
    }
}

/// Moving frames, Gauss-map tension, loop families and normal energy for
/// conformal surfaces in S^4.
#[derive(Debug, Parser)]
#[command(name = "s4gauss", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Configuration file (not needed for `catalog`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Lambda list such as `1,i,-1` or `theta=0.5`, overriding `[family] lambdas`.
    #[arg(long)]
    lambda: Option<String>,
    /// Square grid size, overriding `[grid] nx, ny`.
    #[arg(long)]
    n: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match threads_from_env() {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_FAILURE as u8);
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    let overrides = Overrides {
        out: args.out,
        lambdas: args.lambda,
        n: args.n,
    };
    match run_command(args.command.into(), args.config.as_deref(), &overrides) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
