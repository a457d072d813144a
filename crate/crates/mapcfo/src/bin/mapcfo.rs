use clap::Parser;
use mapcfo::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("mapcfo: {e}");
        std::process::exit(e.exit_code());
    }
}
