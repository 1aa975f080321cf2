use std::process::ExitCode;

fn main() -> ExitCode {
    dsr_workbench::cli::main_with_args(std::env::args_os())
}
