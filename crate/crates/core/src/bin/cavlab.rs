fn main() {
    std::process::exit(cavlab::cli::main_from_args(std::env::args_os()));
}
