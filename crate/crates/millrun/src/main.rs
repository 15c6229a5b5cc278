fn main() {
    std::process::exit(millrun::cli::run_from(std::env::args_os()));
}
