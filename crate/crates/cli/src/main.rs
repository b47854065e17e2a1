mod args;
mod commands;
mod failure;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command, FileConfig};
use crate::failure::Failure;

fn run(cli: &Cli) -> Result<(), Failure> {
    let file = FileConfig::load(cli.config.as_deref())?;
    if let Some(threads) = cli.threads.or(file.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::validation(format!("--threads: {e}")))?;
    }
    match &cli.command {
        Command::Simulate(a) => commands::simulate(a, &file),
        Command::Fit(a) => commands::fit_cmd(a, &file),
        Command::Infer(a) => commands::infer(a, &file),
        Command::Eval(a) => commands::eval(a, &file),
        Command::Rank(a) => commands::rank(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
