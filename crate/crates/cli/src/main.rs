use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use wirescatter_cli::{execute, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(output) => {
            for w in &output.warnings {
                log::warn!("{w}");
            }
            if output.written_to.is_none() {
                let mut stdout = std::io::stdout().lock();
                if stdout.write_all(output.text.as_bytes()).is_err() {
                    return ExitCode::from(1);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
