fn main() {
    std::process::exit(sunrise_maximal::cli::main_with_args(std::env::args_os()));
}
