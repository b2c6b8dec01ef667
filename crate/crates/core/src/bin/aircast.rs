fn main() {
    std::process::exit(aircast::cli::run(std::env::args_os()));
}
