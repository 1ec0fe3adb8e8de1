mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, ProbeCommand};
use commands::VerificationFailed;

fn dispatch(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Linearize(a) => commands::linearize(a),
        Command::Converge(a) => commands::converge(a),
        Command::Decompose(a) => commands::decompose(a),
        Command::Termcount(a) => commands::termcount(a),
        Command::Synthesize(a) => commands::synthesize(a),
        Command::Encode(a) => commands::encode(a),
        Command::Verify(a) => commands::verify(a),
        Command::Probe(ProbeCommand::Train(a)) => commands::probe_train(a),
        Command::Probe(ProbeCommand::Varscan(a)) => commands::probe_varscan(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<VerificationFailed>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
