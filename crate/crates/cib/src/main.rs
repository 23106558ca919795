use std::process::ExitCode;

fn main() -> ExitCode {
    cib::cli::main()
}
