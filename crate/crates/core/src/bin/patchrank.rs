use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(patchrank::cli::run(std::env::args_os()))
}
