fn main() {
    std::process::exit(dle::cli::run(std::env::args_os()));
}
