fn main() {
    std::process::exit(fracflow_cli::run_command(std::env::args_os()));
}
