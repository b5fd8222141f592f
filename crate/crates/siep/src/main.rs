use std::process::ExitCode;

fn main() -> ExitCode {
    let result = siep::cli::run(std::env::args_os());
    print!("{}", result.stdout);
    eprint!("{}", result.stderr);
    ExitCode::from(result.code)
}
