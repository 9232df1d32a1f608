fn main() {
    std::process::exit(dimcert::cli::main_with_args(std::env::args_os()));
}
