use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(geopriv_cli::run(std::env::args_os()))
}
