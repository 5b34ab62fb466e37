fn main() {
    std::process::exit(physarum::cli::run_from(std::env::args_os()));
}
