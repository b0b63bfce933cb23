use std::process::ExitCode;

use clap::Parser;
use krein_cli::{run_cli, Cli, EXIT_ERROR};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("KREIN_LOG", "warn")).init();
    krein_core::use_sequential_kernels();
    // clap's own usage errors would exit with 2, which is reserved for findings
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run_cli(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("krein: error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
