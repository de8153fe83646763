fn main() {
    std::process::exit(cubesum::cli::main());
}
