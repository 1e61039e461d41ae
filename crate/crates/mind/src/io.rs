//! Signal file formats: CSV with a `value` header, bare JSON arrays, and
//! raw little-endian `f64`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{MindError, Result};

/// Read a one-column CSV with header `value`.
pub fn read_signal_csv(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| MindError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim().trim_start_matches('\u{feff}') == "value" => {}
        Some((_, header)) => {
            return Err(MindError::Parse(format!(
                "{}: expected header \"value\", found {:?}",
                path.display(),
                header
            )))
        }
        None => return Err(MindError::Parse(format!("{}: empty file", path.display()))),
    }
    let mut values = Vec::new();
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            MindError::Parse(format!(
                "{}: line {}: not a number: {:?}",
                path.display(),
                lineno + 1,
                line
            ))
        })?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(MindError::Parse(format!("{}: no values after header", path.display())));
    }
    Ok(values)
}

pub fn write_signal_csv(path: &Path, values: &[f64]) -> Result<()> {
    let mut out = String::with_capacity(values.len() * 20 + 8);
    out.push_str("value\n");
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read a bare JSON array of numbers.
pub fn read_signal_json(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| MindError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    serde_json::from_str(&text)
        .map_err(|e| MindError::Parse(format!("{}: {e}", path.display())))
}

pub fn write_signal_json(path: &Path, values: &[f64]) -> Result<()> {
    fs::write(path, serde_json::to_string(values).map_err(|e| MindError::Parse(e.to_string()))?)?;
    Ok(())
}

/// Read raw little-endian `f64` values.
pub fn read_signal_binary(path: &Path) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .map_err(|e| MindError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?
        .read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(MindError::Parse(format!(
            "{}: byte length {} is not a multiple of 8",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn write_signal_binary(path: &Path, values: &[f64]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    for v in values {
        f.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}
