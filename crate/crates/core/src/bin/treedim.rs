fn main() {
    std::process::exit(treedim::cli::run(std::env::args_os()));
}
