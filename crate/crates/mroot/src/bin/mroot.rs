fn main() {
    std::process::exit(mroot::cli::main_with_args(std::env::args_os()));
}
