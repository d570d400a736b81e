use std::io::Write;
use std::path::PathBuf;

use clap::ValueEnum;
use coupon_core::{ArithmeticMode, Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// What every JSON output carries besides the result itself. Nothing here
/// depends on the clock or the environment, so reruns are byte-identical.
#[derive(Serialize)]
pub struct OutputRecord<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub args: &'a serde_json::Value,
    pub input_sha256: String,
    pub mode: ArithmeticMode,
    pub result: T,
}

pub fn input_hash(command: &str, args: &serde_json::Value, extra: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    h.update(serde_json::to_vec(args).expect("args serialize"));
    h.update([0]);
    h.update(extra);
    hex::encode(h.finalize())
}

pub struct Sink {
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Sink {
    pub fn write(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                stdout.flush()?;
            }
        }
        Ok(())
    }

    pub fn json<T: Serialize>(&self, record: &OutputRecord<'_, T>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(record).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        text.push('\n');
        self.write(&text)
    }
}

/// CSV text from a header and rows of already formatted cells.
pub fn csv_table<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}
