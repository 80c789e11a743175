fn main() {
    std::process::exit(todalab::cli::main_with_args(std::env::args()));
}
