use std::process::ExitCode;

fn main() -> ExitCode {
    wumprep::cli::main()
}
