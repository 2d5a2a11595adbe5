use std::io::IsTerminal;
use std::process::ExitCode;

use clap::{ColorChoice, CommandFactory, FromArgMatches};
use intercorr_cli::args::Cli;
use intercorr_cli::{run, Status};

fn no_color() -> bool {
    std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty())
}

fn report(msg: &str) {
    if !no_color() && std::io::stderr().is_terminal() {
        eprintln!("\x1b[31merror:\x1b[0m {msg}");
    } else {
        eprintln!("error: {msg}");
    }
}

fn main() -> ExitCode {
    let mut command = Cli::command();
    if no_color() {
        command = command.color(ColorChoice::Never);
    }
    let cli = match Cli::from_arg_matches(&command.get_matches()) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::Failed(msg)) => {
            report(&msg);
            ExitCode::from(1)
        }
        Err(e) => {
            report(&e.to_string());
            ExitCode::from(e.exit_code())
        }
    }
}
