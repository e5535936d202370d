fn main() {
    std::process::exit(schwa::cli::main());
}
