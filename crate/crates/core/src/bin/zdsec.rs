fn main() {
    std::process::exit(zdsec::cli::main_with_args(std::env::args_os()));
}
