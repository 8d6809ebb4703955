use std::process::ExitCode;

use almostdom_cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let (Some(path), Some(curves)) = (&cli.emit_curves, &outcome.curves) {
        if let Err(e) = std::fs::write(path, curves) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    match &cli.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.report) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{}", outcome.report),
    }
    ExitCode::from(outcome.exit_code as u8)
}
