use std::fs;
use std::path::Path;

use fusekit_core::numerics::io::{read_fkmx, write_fkmx};
use fusekit_core::Matrix;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::CliError;
use crate::provenance::Provenance;

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    let bytes = read_bytes(path)?;
    String::from_utf8(bytes).map_err(|_| CliError::Input(format!("{} is not valid UTF-8", path.display())))
}

/// Reads a file and records its hash in `prov`.
pub fn read_tracked(path: &Path, prov: &mut Provenance) -> Result<String, CliError> {
    let text = read_text(path)?;
    prov.add_input(path, text.as_bytes());
    Ok(text)
}

/// One value per non-blank line.
pub fn parse_jsonl<T: DeserializeOwned>(text: &str, path: &Path) -> Result<Vec<T>, CliError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| CliError::Input(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write(path, to_pretty_json(value))
}

/// Reads an FKMX matrix; any format problem is an input error.
pub fn read_matrix(path: &Path, prov: &mut Provenance) -> Result<Matrix, CliError> {
    let bytes = read_bytes(path)?;
    prov.add_input(path, &bytes);
    read_fkmx(bytes.as_slice()).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_fkmx(m, &mut buf).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    write(path, buf)
}
