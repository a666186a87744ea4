fn main() {
    std::process::exit(qcbnorm_cli::run_cli(std::env::args_os()));
}
