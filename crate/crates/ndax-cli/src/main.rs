//! Command-line front end. Subcommands are filled in as the engine grows.

fn main() {
    eprintln!("ndax: no subcommands are wired up yet");
    std::process::exit(2);
}
