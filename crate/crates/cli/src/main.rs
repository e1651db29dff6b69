//! `cae`: command-line front end to the assurance-case engine.

mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{CliError, Output};

fn run(cli: Cli) -> Result<Output, CliError> {
    let f = cli.format;
    match cli.command {
        Command::Validate { case } => commands::validate(f, &case),
        Command::Soundness { case } => commands::soundness(f, &case),
        Command::Propagate { case, method, warrant, exact } => {
            commands::propagate_case(f, &case, method.method, warrant.allow_missing_warrant, exact)
        }
        Command::RequiredConfidence { target, n, method } => commands::required_confidence(f, target, n, method.method),
        Command::Whatif { case, set, method, warrant } => {
            commands::whatif_case(f, &case, &set, method.method, warrant.allow_missing_warrant)
        }
        Command::Defeaters(cmd) => commands::defeaters(f, &cmd),
        Command::Delphi(cmd) => commands::delphi(f, &cmd),
        Command::Report(cmd) => commands::report(f, &cmd),
        Command::Serve { port, cases_dir, ui_dir } => serve(port, cases_dir, ui_dir),
    }
}

fn serve(
    port: Option<u16>,
    cases_dir: Option<std::path::PathBuf>,
    ui_dir: Option<std::path::PathBuf>,
) -> Result<Output, CliError> {
    let mut config = cae_server::ServiceConfig::from_env().map_err(CliError::Usage)?;
    config.port = port.unwrap_or(config.port);
    config.cases_dir = cases_dir.or(config.cases_dir);
    config.ui_dir = ui_dir.or(config.ui_dir);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Domain(e.to_string()))?;
    runtime.block_on(cae_server::serve(config)).map_err(|e| CliError::Domain(e.to_string()))?;
    Ok(Output { stdout: String::new(), failed: false })
}

fn main() -> ExitCode {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    match run(Cli::parse()) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            // A closed pipe is not an error worth reporting.
            let _ = stdout.write_all(out.stdout.as_bytes());
            ExitCode::from(u8::from(out.failed))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
