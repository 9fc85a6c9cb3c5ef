fn main() {
    std::process::exit(copgauss_harness::cli::run(std::env::args_os()));
}
