fn main() {
    std::process::exit(reinforced_core::cli::main_with_args(std::env::args_os()));
}
