use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub enum Outcome {
    Success,
    /// A structured negative result; the report was still written.
    Failure,
}

pub type CmdResult = Result<Outcome, String>;

/// One JSON line. Everything except `timing` is a function of the command
/// line and seed.
#[derive(Serialize)]
pub struct Report<'a> {
    pub command: &'a [String],
    pub subcommand: &'a str,
    pub mode: &'a str,
    pub seed: u64,
    pub config: Value,
    pub result: Value,
    pub timing: Timing,
}

#[derive(Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

impl From<Duration> for Timing {
    fn from(d: Duration) -> Self {
        Timing {
            elapsed_ms: d.as_secs_f64() * 1e3,
        }
    }
}

pub struct Sink {
    out: Box<dyn Write>,
    command: Vec<String>,
    subcommand: String,
}

impl Sink {
    pub fn open(path: Option<&Path>, command: Vec<String>, subcommand: String) -> io::Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(OpenOptions::new().create(true).append(true).open(p)?),
            None => Box::new(io::stdout()),
        };
        Ok(Sink {
            out,
            command,
            subcommand,
        })
    }

    /// Serializes the whole line before writing so a failure never leaves a
    /// partial line behind.
    pub fn emit(
        &mut self,
        subcommand: &str,
        mode: &str,
        seed: u64,
        config: impl Serialize,
        result: impl Serialize,
        elapsed: Duration,
    ) -> Result<(), String> {
        let report = Report {
            command: &self.command,
            subcommand,
            mode,
            seed,
            config: to_value(config)?,
            result: to_value(result)?,
            timing: elapsed.into(),
        };
        let mut line = serde_json::to_string(&report).map_err(|e| e.to_string())?;
        line.push('\n');
        self.out
            .write_all(line.as_bytes())
            .map_err(|e| e.to_string())?;
        self.out.flush().map_err(|e| e.to_string())
    }

    pub fn error(&mut self, seed: u64, message: &str) -> Result<(), String> {
        let subcommand = self.subcommand.clone();
        self.emit(
            &subcommand,
            "desk",
            seed,
            Value::Null,
            serde_json::json!({ "error": message }),
            Duration::ZERO,
        )
    }
}

fn to_value(x: impl Serialize) -> Result<Value, String> {
    serde_json::to_value(x).map_err(|e| e.to_string())
}

/// SHA-256 of the vertex sequence written as space-separated decimals.
pub fn digest(vertices: &[usize]) -> String {
    let text: Vec<String> = vertices.iter().map(|v| v.to_string()).collect();
    let hash = Sha256::digest(text.join(" ").as_bytes());
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn create(path: &Path) -> Result<File, String> {
    File::create(path).map_err(|e| format!("{}: {e}", path.display()))
}
