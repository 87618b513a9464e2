fn main() {
    std::process::exit(rackcoop::harness::cli::run(std::env::args_os()));
}
