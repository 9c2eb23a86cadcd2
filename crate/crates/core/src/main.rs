fn main() {
    std::process::exit(hquasi::cli::run(std::env::args_os()));
}
