fn main() {
    std::process::exit(pfbind_cli::run_from_args(std::env::args_os()));
}
