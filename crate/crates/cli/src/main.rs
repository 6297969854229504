use std::process::ExitCode;

use clap::Parser;
use hkquad_cli::run::{run, Cli, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    if let Ok(n) = std::env::var("HKQUAD_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("HKQUAD_THREADS must be a positive integer, got {n:?}");
                return ExitCode::from(EXIT_USAGE as u8);
            }
        }
    }
    match run(&cli) {
        Ok(out) => {
            println!("{}", out.stdout.trim_end());
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
