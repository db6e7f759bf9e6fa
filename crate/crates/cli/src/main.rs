fn main() {
    std::process::exit(mulr_cli::commands::main_with(std::env::args_os()));
}
