use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(afshar::cli::main_with(std::env::args_os(), &mut io::stdout(), &mut io::stderr()))
}
