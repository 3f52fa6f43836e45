mod args;
mod commands;
mod error;
mod output;

use clap::Parser;

fn main() {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let name = cli.command.name();
    if let Err(e) = commands::run(cli.command) {
        eprintln!("paamm {name}: {e}");
        std::process::exit(e.exit_code());
    }
}
