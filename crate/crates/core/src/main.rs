fn main() {
    std::process::exit(qrenyi::cli::run(std::env::args_os()));
}
