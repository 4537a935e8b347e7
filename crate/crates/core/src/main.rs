fn main() {
    let code = tumornet::cli::run(std::env::args_os());
    std::process::exit(code);
}
