fn main() {
    std::process::exit(glasso_cli::main_with_args(std::env::args_os()));
}
