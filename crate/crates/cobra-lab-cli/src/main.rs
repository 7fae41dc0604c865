use clap::Parser;

fn main() {
    env_logger::init();
    let cli = cobra_lab_cli::Cli::parse();
    std::process::exit(cobra_lab_cli::run(cli));
}
