fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SSSP_LOG", "warn")).init();
    std::process::exit(sssp_kit::cli::main_from_env());
}
