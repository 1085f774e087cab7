mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;
use crowdlab::Execution;

use args::{Cli, Command};
use error::CliError;

fn execution(threads: Option<usize>) -> Result<Execution, CliError> {
    match threads {
        Some(0) => Err(error::invalid("--threads must be at least 1")),
        Some(1) => Ok(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| error::invalid(e.to_string()))?;
            Ok(Execution::Parallel)
        }
        _ if Execution::parallel_available() => Ok(Execution::Parallel),
        _ => Ok(Execution::Sequential),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let exec = execution(cli.threads)?;
    let config = cli.config.as_deref();
    match cli.command {
        Command::SpeedDiagram(a) => commands::speed(a, config, exec),
        Command::Stability(a) => commands::stability(a, config),
        Command::Converge(a) => commands::converge(a, config, exec),
        Command::ScalingEquiv(a) => commands::scaling(a, config, exec),
        Command::StabilityBound(a) => commands::bound(a, config, exec),
        Command::W1(a) => commands::w1(a, config),
        Command::Simulate(a) => commands::simulate(a, config, exec),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("crowdlab {name}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
