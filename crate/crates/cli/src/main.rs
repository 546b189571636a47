use std::fs;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use regseq_cli::args::Cli;
use regseq_cli::{render, run, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE as u8),
            };
        }
    };
    let outcome = run(&cli);
    let text = render(&outcome.report);
    let mut code = outcome.code;
    if outcome.report.get("error").is_some() {
        eprint!("{text}");
    } else if let Some(path) = &cli.global.out {
        if let Err(e) = fs::write(path, &text) {
            eprintln!("{}: {e}", path.display());
            code = EXIT_USAGE;
        }
    } else {
        print!("{text}");
    }
    ExitCode::from(code as u8)
}
