fn main() {
    std::process::exit(pbv_core::cli::main_with_args(std::env::args_os()));
}
