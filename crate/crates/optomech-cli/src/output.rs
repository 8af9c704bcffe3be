//! Deterministic result serialization.
//!
//! Numeric tables go to CSV, scalar reports and parameter echoes to JSON
//! manifests. Every file is stamped with the SHA-256 of the canonical
//! configuration serialization so outputs can always be traced back to
//! their inputs, and nothing carries a timestamp: rerunning a seeded
//! configuration reproduces every byte. Floats are printed with 17
//! significant digits, which round-trips f64 exactly and makes golden
//! files stable.

use crate::config::RunConfig;
use crate::fault::{CliResult, Fault};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;

/// Formats one float with 17 significant digits (exact f64 round-trip).
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// SHA-256 hex digest of the canonical configuration serialization
/// (JSON value form: object keys sorted, no whitespace).
pub fn config_hash(cfg: &RunConfig) -> String {
    let value = serde_json::to_value(cfg).expect("config serializes");
    hash_of_value(&value)
}

/// SHA-256 hex digest of a JSON value's compact serialization.
pub fn hash_of_value(value: &Value) -> String {
    let canon = serde_json::to_string(value).expect("value serializes");
    let digest = Sha256::digest(canon.as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

/// Writes one CSV table: a hash stamp line, a header line, then rows.
pub fn write_csv(
    path: &Path,
    config_hash: &str,
    columns: &[String],
    rows: &[Vec<String>],
) -> CliResult<()> {
    let file = std::fs::File::create(path).map_err(|e| Fault::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let write = |out: &mut std::io::BufWriter<std::fs::File>, line: &str| {
        writeln!(out, "{line}").map_err(|e| Fault::io(path, e))
    };
    write(&mut out, &format!("# config_sha256={config_hash}"))?;
    write(&mut out, &columns.join(","))?;
    for row in rows {
        write(&mut out, &row.join(","))?;
    }
    out.flush().map_err(|e| Fault::io(path, e))
}

/// Reads the hash stamp from the first line of a CSV file.
pub fn read_csv_hash(path: &Path) -> CliResult<String> {
    let text = std::fs::read_to_string(path).map_err(|e| Fault::io(path, e))?;
    let first = text.lines().next().unwrap_or("");
    first
        .strip_prefix("# config_sha256=")
        .map(str::to_owned)
        .ok_or_else(|| {
            Fault::Config(format!("{}: missing config hash stamp", path.display()))
        })
}

/// Writes a JSON manifest, pretty-printed with sorted keys.
pub fn write_json(path: &Path, value: &Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("manifest serializes");
    std::fs::write(path, text + "\n").map_err(|e| Fault::io(path, e))
}

/// Reads a JSON manifest back.
pub fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Fault::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Fault::Config(format!("{}: {e}", path.display())))
}
