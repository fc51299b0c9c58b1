//! The `levyq` command line: loaders, commands and backtests.

pub mod backtest;
pub mod commands;
pub mod error;
pub mod io;
pub mod opts;

pub use error::{CliError, Result};

/// Caps rayon at `LEVYQ_THREADS` when set. Results do not depend on the
/// thread count; only wall time does.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("LEVYQ_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("LEVYQ_THREADS must be a positive integer, got '{v}'")))?;
    // a pool built earlier in the process stays in place
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `argv`, runs the command and writes its output. Returns the exit
/// code: 0 success, 1 invalid input, 2 numerical failure.
pub fn main_with<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match opts::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let run = || -> Result<()> {
        init_threads()?;
        let text = commands::execute(&cli)?;
        io::emit(cli.common.out.as_deref(), &text)
    };
    match run() {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("levyq: {e}");
            e.exit_code()
        }
    }
}
