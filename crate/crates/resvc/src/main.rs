fn main() {
    std::process::exit(resvc::cli::run(std::env::args_os()));
}
