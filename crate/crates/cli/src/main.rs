use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use relaycap_cli::app::{run, Cli, EXIT_IO};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let code = match run(&cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("relaycap: {e}");
            e.exit_code()
        }
    };
    if out.flush().is_err() {
        return ExitCode::from(EXIT_IO as u8);
    }
    ExitCode::from(code as u8)
}
