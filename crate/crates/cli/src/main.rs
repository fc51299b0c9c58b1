fn main() {
    std::process::exit(levyq_cli::main_with(std::env::args_os()));
}
