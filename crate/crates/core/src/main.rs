fn main() {
    std::process::exit(smcov::cli::main_with_args(std::env::args_os()));
}
