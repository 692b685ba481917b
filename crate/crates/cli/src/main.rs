mod cli;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = cli::Cli::parse();
    let result = commands::run(&cli).and_then(|o| output::emit(&o, cli.global.format, cli.global.out.as_deref()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e.downcast_ref::<btmem::Error>() {
                Some(m) => {
                    let dbg = format!("{m:?}");
                    let name = dbg.split(['(', ' ']).next().unwrap_or_default();
                    eprintln!("error: {name}: {e:#}");
                }
                None => eprintln!("error: {e:#}"),
            }
            ExitCode::from(1)
        }
    }
}
