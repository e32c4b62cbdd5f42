fn main() {
    std::process::exit(level_density::cli::run(std::env::args()));
}
