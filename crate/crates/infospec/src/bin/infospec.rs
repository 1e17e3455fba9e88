use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(infospec::cli::run() as u8)
}
