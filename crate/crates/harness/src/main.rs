use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(fbm_lift_harness::cli::run(std::env::args_os()))
}
