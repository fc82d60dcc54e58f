fn main() {
    std::process::exit(cmxqe::cli::main());
}
