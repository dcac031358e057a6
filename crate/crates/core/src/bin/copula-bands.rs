fn main() {
    std::process::exit(copula_bands::cli::main_with_args(std::env::args_os()));
}
