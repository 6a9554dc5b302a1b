mod commands;
mod params;

use std::process::ExitCode;

use clap::Parser;

use params::Cli;

/// Exit status classes.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or input files; exit 2.
    Usage(String),
    /// An exact check failed; exit 1.
    Verification(String),
    /// Anything else; exit 1.
    Runtime(String),
}

impl From<latflow::Error> for Failure {
    fn from(e: latflow::Error) -> Self {
        use latflow::Error as E;
        match e {
            E::Io(_) | E::Csv(_) | E::Internal(_) | E::NodeBudget(_) | E::Singular => Failure::Runtime(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
