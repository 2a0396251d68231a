fn main() {
    std::process::exit(qmac::cli::run_from(std::env::args_os()));
}
