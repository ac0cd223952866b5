fn main() -> std::process::ExitCode {
    qpm_cli::main_with_args(std::env::args_os())
}
