fn main() {
    std::process::exit(starid::cli::main_with_args(std::env::args_os()));
}
