fn main() {
    std::process::exit(corrlab::cli::run(std::env::args_os()));
}
