fn main() {
    std::process::exit(refclass::cli::run_cli(std::env::args_os()));
}
