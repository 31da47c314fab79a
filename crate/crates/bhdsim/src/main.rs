fn main() {
    std::process::exit(bhdsim::scenario::cli::run());
}
