fn main() {
    std::process::exit(deepfolio::cli::main(std::env::args_os()));
}
