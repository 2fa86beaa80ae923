fn main() {
    std::process::exit(nk_deliberation::cli::main());
}
