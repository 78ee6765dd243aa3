use std::io::Write;

use clap::Parser;
use mubkit_cli::{run, to_json_string, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let _ = writeln!(std::io::stdout(), "{}", to_json_string(&outcome.report, cli.opts.pretty));
            std::process::exit(outcome.exit_code());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
