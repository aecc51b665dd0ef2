fn main() {
    std::process::exit(sumset_dynamics::cli::main_entry());
}
