fn main() {
    std::process::exit(pgg_evo::cli::main_entry());
}
