fn main() {
    std::process::exit(randcca_cli::run_from(std::env::args_os()));
}
