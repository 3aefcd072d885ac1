fn main() {
    std::process::exit(abspin_cli::main_with_env());
}
