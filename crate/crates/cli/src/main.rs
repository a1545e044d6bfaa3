use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let args = match resolvedk_cli::Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let out = resolvedk_cli::run(&args);
    if out.status == 2 {
        eprint!("{}", out.output);
    } else {
        print!("{}", out.output);
        let _ = std::io::stdout().flush();
    }
    ExitCode::from(out.status as u8)
}
