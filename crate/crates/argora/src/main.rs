use clap::Parser;

use argora::cli::{run, Cli, Style};

fn main() {
    let cli = Cli::parse();
    let code = run(cli, &mut std::io::stdout(), &mut std::io::stderr(), Style::detect());
    std::process::exit(code);
}
