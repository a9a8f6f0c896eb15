fn main() {
    std::process::exit(fluxknot::cli::run(std::env::args_os()));
}
