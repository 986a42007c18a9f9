use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(cavrot::run(std::env::args_os()))
}
