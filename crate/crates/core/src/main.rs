fn main() {
    std::process::exit(bergman_wold::cli::main_with_args(std::env::args_os()));
}
