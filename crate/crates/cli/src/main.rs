mod args;
mod config;
mod run;

use std::io::IsTerminal;
use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};

/// Failures, split by exit status: bad invocation (1) versus bad data (2).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Data {
        context: String,
        #[source]
        source: affect_probe::Error,
    },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn data(context: impl std::fmt::Display, source: affect_probe::Error) -> Self {
        CliError::Data {
            context: context.to_string(),
            source,
        }
    }

    pub fn io(context: impl std::fmt::Display, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.to_string(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data { .. } | CliError::Io { .. } => 2,
        }
    }
}

fn report_error(err: &CliError) {
    let stderr = std::io::stderr();
    let color = stderr.is_terminal() && std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty());
    if color {
        eprintln!("\x1b[1;31merror:\x1b[0m {err}");
    } else {
        eprintln!("error: {err}");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Probe(a) => run::probe(&a),
        Command::Validate(a) => run::validate(&a),
        Command::Aggregate(a) => run::aggregate(&a),
        Command::Synth(a) => run::synth(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(&e);
            ExitCode::from(e.exit_code())
        }
    }
}
