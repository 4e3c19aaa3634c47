fn main() {
    std::process::exit(naklab::cli::run(std::env::args_os()));
}
