fn main() {
    std::process::exit(heralded_cli::run(std::env::args_os()));
}
