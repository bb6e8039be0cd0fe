use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use nonholonomic_cli::args::{Cli, Invocation};
use nonholonomic_cli::{run_and_write, CliError, EXIT_OK, EXIT_VALIDATION};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_OK as u8);
        }
        Err(e) => {
            let err = CliError::Validation(e.render().to_string().trim().to_owned());
            eprintln!("{}", err.to_json());
            return ExitCode::from(EXIT_VALIDATION as u8);
        }
    };
    let outcome = cli
        .command
        .into_invocation()
        .and_then(|Invocation::Run { config, base }| run_and_write(config, &base));
    match outcome {
        Ok(Some(text)) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
            ExitCode::from(EXIT_OK as u8)
        }
        Ok(None) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
