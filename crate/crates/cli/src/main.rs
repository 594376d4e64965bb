use clap::Parser;
use fdcell_cli::{run, Cli, ExitStatus};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(ExitStatus::of(&err).code());
    }
}
