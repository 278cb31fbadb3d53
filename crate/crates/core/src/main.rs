fn main() {
    std::process::exit(ftcal::cli::main());
}
