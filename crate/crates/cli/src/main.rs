use std::process::ExitCode;

use clap::Parser;
use dcf_cli::args::Cli;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dcf_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dcf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
