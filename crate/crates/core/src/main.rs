fn main() {
    std::process::exit(svc_cache::cli::run(std::env::args_os()));
}
