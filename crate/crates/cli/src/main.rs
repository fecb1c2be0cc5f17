mod answer;
mod args;
mod config;
mod eval;
mod exit;
mod gen;
mod manifest;
mod train;

use clap::Parser;

use args::{Cli, Command};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(a) => train::run(a),
        Command::Eval(a) => eval::run(a),
        Command::Answer(a) => answer::run(a),
        Command::GenQueries(a) => gen::run(a),
    };
    let code = match result {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit::code_for(&e)
        }
    };
    std::process::exit(code);
}
