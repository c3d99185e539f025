fn main() {
    std::process::exit(wiretap_core::cli::run_from_env());
}
