fn main() {
    std::process::exit(fdhap::cli::main_with_args(std::env::args_os()));
}
