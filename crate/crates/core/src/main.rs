fn main() {
    std::process::exit(pibt::cli::run(std::env::args_os()));
}
