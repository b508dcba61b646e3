//! File formats, batteries and the command-line front end for
//! [`bieberbach_core`].
//!
//! Exit codes of [`run`]: 0 when every row passes, 1 on a numerical failure,
//! 2 on a configuration error.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};

use clap::error::ErrorKind;
use clap::Parser;

use crate::commands::{execute, RunOutput};
use crate::config::{normalize_args, Cli, RunConfig};
use crate::report::{write_rows, write_scan};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "BIEBERBACH_LAB_THREADS";

/// Parses `args` (program name first), runs the command and writes the report.
pub fn run<I, T>(args: I, threads_env: Option<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let cli = match Cli::try_parse_from(normalize_args(args)) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_PASS
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_CONFIG
                }
            };
        }
    };
    let cfg = match RunConfig::from_cli(cli, threads_env) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let out = match execute(&cfg) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = emit(&cfg, &out, stdout) {
        let _ = writeln!(stderr, "error: cannot write report: {e}");
        return EXIT_CONFIG;
    }
    let (total, failed) = match &out {
        RunOutput::Rows { rows, .. } => (rows.len(), rows.iter().filter(|r| !r.pass).count()),
        RunOutput::Scan { rows, pass } => (rows.len(), usize::from(!pass)),
    };
    let _ = writeln!(stderr, "{total} rows, {failed} failed");
    if out.passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn emit(cfg: &RunConfig, out: &RunOutput, stdout: &mut dyn Write) -> io::Result<()> {
    let mut sink: Box<dyn Write + '_> = match &cfg.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(stdout),
    };
    match out {
        RunOutput::Rows { command, rows } => write_rows(&mut sink, command, rows, cfg.format)?,
        RunOutput::Scan { rows, .. } => write_scan(&mut sink, rows, cfg.format)?,
    }
    sink.flush()
}
