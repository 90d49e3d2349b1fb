fn main() {
    std::process::exit(relaxed_bell::cli::main_with_args(std::env::args_os()));
}
