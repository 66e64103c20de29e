fn main() {
    std::process::exit(decaf::cli::main());
}
