fn main() {
    std::process::exit(satwave::cli::run(std::env::args_os()));
}
