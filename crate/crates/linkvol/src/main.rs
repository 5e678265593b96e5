fn main() {
    std::process::exit(linkvol::cli::run(std::env::args_os()));
}
