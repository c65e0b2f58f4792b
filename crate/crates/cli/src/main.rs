use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(repcnot::main_with(std::env::args_os()))
}
