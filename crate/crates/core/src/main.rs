fn main() {
    std::process::exit(bootlasso::cli::run_from(std::env::args_os()));
}
