fn main() {
    std::process::exit(tdaport::cli::main_with_args(std::env::args_os()));
}
