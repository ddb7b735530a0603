use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod config;
mod failure;
mod io;
mod selftest;

use args::{Cli, Command};
use failure::certificate;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, dest, result) = match &cli.command {
        Command::Build(a) => ("build", a.report.clone(), commands::build(a)),
        Command::Verify(a) => ("verify", a.output.clone(), commands::verify(a)),
        Command::Qms(a) => ("qms", a.output.clone(), commands::qms(a)),
        Command::Counterexample(a) => ("counterexample", a.output.clone(), commands::counterexample(a)),
        Command::Selftest(a) => ("selftest", a.output.clone(), selftest::selftest(a)),
    };
    let (text, code) = match result {
        Ok(out) => (io::to_json(&out.report), out.exit_code),
        Err(f) => {
            eprintln!("flowmetric {name}: {}", f.message);
            (io::to_json(&certificate(name, &f)), f.exit_code)
        }
    };
    if let Err(f) = io::emit(dest.as_deref(), &text) {
        eprintln!("flowmetric {name}: {}", f.message);
        return ExitCode::from(failure::EXIT_FAILED as u8);
    }
    ExitCode::from(code as u8)
}
