fn main() {
    std::process::exit(rld_cli::run(std::env::args_os()));
}
