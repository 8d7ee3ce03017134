fn main() {
    std::process::exit(swarmsling::sim_cli::main());
}
