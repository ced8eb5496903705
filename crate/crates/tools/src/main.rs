fn main() {
    std::process::exit(dmt_tools::cli::run(std::env::args_os()));
}
