use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use simd_redc_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (out, err) = run(&cli);
    print!("{}", out.stdout);
    let _ = std::io::stdout().flush();
    if let Some(err) = err {
        eprintln!("simd-redc: {err}");
    }
    ExitCode::from(out.code as u8)
}
