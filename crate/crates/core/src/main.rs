fn main() {
    std::process::exit(logitdyn::cli::run());
}
