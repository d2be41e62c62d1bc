use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Core(arena_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<arena_core::Error> for CliError {
    fn from(e: arena_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

/// CSV destination whose first line records the command, seed and config.
pub struct Sink {
    raw: Box<dyn Write>,
}

impl Sink {
    pub fn open(out: Option<&Path>, command: &str, seed: u64, config: &impl Serialize) -> CliResult<Self> {
        let raw: Box<dyn Write> = match out {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
            )),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        let mut sink = Self { raw };
        sink.comment(&format!("arena {command} seed={seed} config={}", serde_json::to_string(config)?))?;
        Ok(sink)
    }

    pub fn comment(&mut self, text: &str) -> CliResult {
        writeln!(self.raw, "# {text}")?;
        Ok(())
    }

    pub fn csv(self) -> csv::Writer<Box<dyn Write>> {
        csv::Writer::from_writer(self.raw)
    }
}

pub fn fmt_f64(x: f64) -> String {
    x.to_string()
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}
