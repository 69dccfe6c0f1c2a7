fn main() {
    std::process::exit(nk_core::cli::run(std::env::args_os()));
}
