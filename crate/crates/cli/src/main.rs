mod args;
mod commands;
mod error;
mod object_file;
mod output;
mod reproduce;

use clap::Parser;

use args::{Cli, Command};

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Theory(a) => commands::theory(a),
        Command::Stats(a) => commands::stats(a),
        Command::Histogram(a) => commands::histogram_cmd(a),
        Command::Reproduce(a) => reproduce::run(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
