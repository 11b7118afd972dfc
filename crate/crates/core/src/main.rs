use std::process::ExitCode;

fn main() -> ExitCode {
    pdoslab::cli::main()
}
