fn main() {
    std::process::exit(outlier_reduce::cli::run(std::env::args_os()));
}
