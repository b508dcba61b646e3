use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let threads = std::env::var(bieberbach_lab::THREADS_ENV).ok();
    let code = bieberbach_lab::run(std::env::args_os(), threads, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
