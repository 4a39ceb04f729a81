use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use ownconc_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match ownconc_cli::run(&cli) {
        Ok(out) => {
            for note in &out.notes {
                eprintln!("{note}");
            }
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.stdout.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
