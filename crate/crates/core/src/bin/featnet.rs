fn main() {
    std::process::exit(featnet::cli::run(std::env::args_os()));
}
