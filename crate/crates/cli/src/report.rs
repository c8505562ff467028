//! Deterministic CSV and JSON emission (no timestamps, stable key order).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("create {}: {e}", dir.display())))
}

pub fn write_csv(
    dir: &Path,
    name: &str,
    header: &str,
    rows: &[Vec<String>],
) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(&path, out).map_err(|e| CliError::Io(format!("write {}: {e}", path.display())))?;
    Ok(path)
}

pub fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut f = fs::File::create(&path)
        .map_err(|e| CliError::Io(format!("create {}: {e}", path.display())))?;
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("serialize json: {e}")))?;
    f.write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("write {}: {e}", path.display())))?;
    f.write_all(b"\n")
        .map_err(|e| CliError::Io(format!("write {}: {e}", path.display())))?;
    Ok(path)
}

/// Shortest round-trip decimal form (Rust's default f64 Display).
pub fn fmt(x: f64) -> String {
    format!("{x}")
}
