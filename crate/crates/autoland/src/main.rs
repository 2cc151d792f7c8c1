fn main() {
    std::process::exit(autoland::cli::run(std::env::args_os()));
}
