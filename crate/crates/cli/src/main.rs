//! `medusa`: command-line front end for the analysis pipeline.

mod args;
mod cmd;
mod data;
mod manifest;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// A flag value that passed clap but failed validation. Exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Bails out with a [`UsageError`] naming the flag.
#[macro_export]
macro_rules! usage {
    ($flag:expr, $($arg:tt)*) => {
        return Err(anyhow::Error::new($crate::UsageError(format!("{}: {}", $flag, format!($($arg)*)))))
    };
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            usage!("--threads", "must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Synth(a) => cmd::synth::run(&a),
        Command::Ingest(a) => cmd::ingest::run(&a),
        Command::Kinematics(a) => cmd::kinematics::run(&a),
        Command::Soc(a) => cmd::soc::run(&a),
        Command::Phase(a) => cmd::phase::run(&a),
        Command::Esp(a) => cmd::esp::run(&a),
        Command::Train(a) => cmd::rc::train(&a),
        Command::Predict(a) => cmd::rc::predict(&a),
        Command::Confusion(a) => cmd::rc::confusion(&a),
        Command::Report(a) => cmd::rc::report(&a),
        Command::ExportModel(a) => cmd::rc::export_model(&a),
        Command::SearchSensors(a) => cmd::search::run(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if e.downcast_ref::<UsageError>().is_some() {
                eprintln!("error: {e}");
                eprintln!("\nFor more information, try '--help'.");
                ExitCode::from(2)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        }
    }
}
