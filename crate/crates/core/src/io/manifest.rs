//! Campaign manifest: `file,label,power_dbm,temperature_k`.

use serde::Deserialize;

use super::IoError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ManifestRow {
    /// Trace file, relative to the manifest's directory.
    pub file: String,
    /// Resonator label; rows sharing a label form one power sweep.
    pub label: String,
    pub power_dbm: f64,
    pub temperature_k: f64,
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestRow>, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| IoError::MissingHeader(e.to_string()))?;
    let names: Vec<&str> = headers.iter().collect();
    if names != ["file", "label", "power_dbm", "temperature_k"] {
        return Err(IoError::MissingHeader(format!(
            "expected file,label,power_dbm,temperature_k, got {}",
            names.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (idx, rec) in reader.deserialize::<ManifestRow>().enumerate() {
        let row = idx + 1;
        let rec = rec.map_err(|e| IoError::Parse {
            line: row + 1,
            message: e.to_string(),
        })?;
        if !(rec.temperature_k > 0.0) {
            return Err(IoError::NonPositiveValue {
                row,
                column: "temperature_k".into(),
            });
        }
        if !rec.power_dbm.is_finite() {
            return Err(IoError::Parse {
                line: row + 1,
                message: "power_dbm is not finite".into(),
            });
        }
        rows.push(rec);
    }
    Ok(rows)
}
