fn main() {
    std::process::exit(modesim::cli::cli_main(std::env::args_os()));
}
