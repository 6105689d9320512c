fn main() {
    std::process::exit(citecrf_cli::run(std::env::args_os()));
}
