//! Command-line entry point; see [`calabi_gluing::cli`].

use std::io::Write;

fn main() {
    let out = calabi_gluing::cli::run(std::env::args_os());
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    std::process::exit(out.code);
}
