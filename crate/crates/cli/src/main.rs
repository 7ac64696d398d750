fn main() {
    std::process::exit(catplan_cli::main_impl());
}
