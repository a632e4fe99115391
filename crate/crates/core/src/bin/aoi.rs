fn main() {
    std::process::exit(multihop_aoi::cli::main_with_args(std::env::args_os()));
}
