fn main() {
    std::process::exit(gevreylab_cli::main_with_args(std::env::args_os()));
}
