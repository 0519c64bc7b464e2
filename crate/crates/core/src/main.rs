fn main() {
    std::process::exit(iterfr::cli::main_with(std::env::args_os()));
}
