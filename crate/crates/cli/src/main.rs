use std::process::ExitCode;

use clap::Parser;

use infocap_cli::args::Cli;
use infocap_cli::{configured_threads, run};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = configured_threads() {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("warning: cannot size thread pool: {e}");
        }
    }
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
