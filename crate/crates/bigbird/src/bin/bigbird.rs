use std::process::ExitCode;

fn main() -> ExitCode {
    bigbird::cli::main()
}
