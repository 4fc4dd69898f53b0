mod args;
mod commands;
mod config;
mod error;
mod io;
mod provenance;
mod synthetic;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fusekit: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Input("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("cannot size the worker pool: {e}")))?;
    }
    let cfg = config::Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Refine(a) => commands::refine::run(cfg, a),
        Command::GenRiskQa(a) => commands::gen::run(cfg, a),
        Command::Eval(a) => commands::eval::run(cfg, a),
        Command::InteractorDemo(a) => commands::demo::run(cfg, a),
        Command::MaskExp(a) => commands::mask::run(cfg, a),
        Command::Budget(a) => commands::budget::run(cfg, a),
    }
}
