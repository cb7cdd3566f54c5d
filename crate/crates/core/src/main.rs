use clap::Parser;
use env_logger::Env;

fn main() {
    env_logger::Builder::from_env(Env::new().filter_or("RGP_LOG", "info")).init();
    let cli = rgp::cli::Cli::parse();
    std::process::exit(rgp::cli::run(cli));
}
