use std::process::ExitCode;

fn main() -> ExitCode {
    optomech_cli::main_entry()
}
