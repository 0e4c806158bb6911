fn main() {
    std::process::exit(entmono::cli::main_with_args(std::env::args_os()));
}
