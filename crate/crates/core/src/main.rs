fn main() {
    bundle_solve::cli::init_logging();
    std::process::exit(bundle_solve::cli::run(std::env::args_os()));
}
