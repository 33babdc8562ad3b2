fn main() {
    std::process::exit(fairpipe::cli::main_with(std::env::args_os()));
}
