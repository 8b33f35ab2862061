fn main() {
    std::process::exit(tmem::cli::main_with_args(std::env::args_os()));
}
