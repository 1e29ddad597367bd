fn main() {
    std::process::exit(igauss_cli::main_with(std::env::args_os()));
}
