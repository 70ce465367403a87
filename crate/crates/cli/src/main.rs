use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use meadowprob_cli::{run, CliConfig};

fn main() -> ExitCode {
    let outcome = run(&CliConfig::parse());
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    let _ = std::io::stdout().flush();
    ExitCode::from(outcome.status as u8)
}
