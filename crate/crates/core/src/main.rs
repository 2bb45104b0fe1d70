fn main() {
    std::process::exit(stochgeo::cli::main_with_args(std::env::args_os()));
}
