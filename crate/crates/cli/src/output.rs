use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use macrosize::io::{to_json, Header};
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    /// Explicit choice, else the output file extension, else `fallback`.
    pub fn resolve(explicit: Option<Format>, out: Option<&Path>, fallback: Format) -> Format {
        explicit
            .or_else(|| match out?.extension()?.to_str()? {
                "json" => Some(Format::Json),
                "csv" => Some(Format::Csv),
                "txt" => Some(Format::Text),
                _ => None,
            })
            .unwrap_or(fallback)
    }
}

/// First 16 hex digits of SHA-256 over the command, its arguments and the
/// bytes of every input file.
pub fn config_hash(command: &str, args: &impl Serialize, inputs: &[&[u8]]) -> Result<String, CliError> {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    h.update(serde_json::to_vec(args).map_err(|e| CliError::Input(e.to_string()))?);
    for bytes in inputs {
        h.update([0]);
        h.update(Sha256::digest(bytes));
    }
    let digest = h.finalize();
    Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
}

/// `{"header": ..., <payload fields>}` with floats at 12 significant digits.
pub fn json_with_header(header: &Header, payload: &impl Serialize) -> Result<String, CliError> {
    let mut obj = Map::new();
    obj.insert("header".into(), serde_json::to_value(header).map_err(|e| CliError::Input(e.to_string()))?);
    match serde_json::to_value(payload).map_err(|e| CliError::Input(e.to_string()))? {
        Value::Object(fields) => obj.extend(fields),
        other => {
            obj.insert("data".into(), other);
        }
    }
    Ok(to_json(&Value::Object(obj))? + "\n")
}

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Input(format!("cannot write output: {e}")))
        }
    }
}

pub fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}
