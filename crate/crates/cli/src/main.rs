fn main() {
    std::process::exit(coarse_cli::run(std::env::args_os()));
}
