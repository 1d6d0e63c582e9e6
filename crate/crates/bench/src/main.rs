fn main() {
    std::process::exit(ail_bench::cli::run(std::env::args()));
}
