//! Command-line front end for `qpm-core`: exact statistics tables,
//! verification suites, beam-splitter listings, seeded sampling and the
//! swap-circuit comparison.

pub mod args;
pub mod commands;
pub mod config;
pub mod render;

use std::process::ExitCode;

use clap::Parser;

pub use args::{Cli, Format};
pub use commands::{run, Execution, Report, Status};
pub use config::{CliError, RunConfig};

/// Parses `argv`, runs the command and writes the report to stdout.
pub fn main_with_args<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match RunConfig::from_cli(&cli).and_then(|c| Ok((run(&c)?, c.format))) {
        Ok((exec, format)) => {
            print!("{}", render::render(&exec.report, format));
            if exec.status == Status::VerificationFailed {
                eprintln!("qpm: verification failed");
            }
            ExitCode::from(exec.status.exit_code())
        }
        Err(e) => {
            eprintln!("qpm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
