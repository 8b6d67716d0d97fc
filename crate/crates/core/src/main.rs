fn main() {
    std::process::exit(meager_core::cli::main_with_args(std::env::args_os()));
}
