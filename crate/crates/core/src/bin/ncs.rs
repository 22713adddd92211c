fn main() {
    std::process::exit(ncs::cli::run(std::env::args_os()));
}
