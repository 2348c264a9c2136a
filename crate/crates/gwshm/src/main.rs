fn main() {
    std::process::exit(gwshm::cli::run_from(std::env::args_os()));
}
