fn main() {
    std::process::exit(brwlab::cli::main_with_args(std::env::args_os()));
}
