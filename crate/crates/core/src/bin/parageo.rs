use clap::Parser;
use parageo::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    let status = execute(&cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(status.code());
}
