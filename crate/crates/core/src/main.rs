use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CONFOCAL_LOG", "warn")).init();
    let code = confocal::cli::run(confocal::cli::Cli::parse());
    std::process::exit(code);
}
