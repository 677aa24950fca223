fn main() {
    std::process::exit(she_xval::cli::run(std::env::args_os()));
}
