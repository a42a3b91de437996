fn main() {
    std::process::exit(lipfit::cli::run(std::env::args_os()));
}
