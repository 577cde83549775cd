use std::process::ExitCode;

fn main() -> ExitCode {
    dxp::cli::main()
}
