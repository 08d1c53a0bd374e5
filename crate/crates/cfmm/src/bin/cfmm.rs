use std::process::ExitCode;

use cfmm::cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CFMM_LOG", "warn")).format_timestamp(None).init();
    let cli = Cli::parse();
    let code = run(&cli, &mut std::io::stdout().lock());
    ExitCode::from(code)
}
