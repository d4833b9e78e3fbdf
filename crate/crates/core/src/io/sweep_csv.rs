//! Power-sweep CSV: `photon_number,delta_i,sigma` or `power_dbm,delta_i,sigma`.

use std::fmt::Write;

use super::IoError;
use crate::constants::dbm_to_watts;
use crate::model::{photon_number, PowerSweepPoint};

/// Resonator needed to turn a dBm-keyed sweep into photon numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepDevice {
    pub f_r: f64,
    pub q_l: f64,
    pub qc_mag: f64,
}

#[derive(Clone, Copy, PartialEq)]
enum Key {
    PhotonNumber,
    PowerDbm,
}

pub fn parse_sweep_csv(text: &str, device: Option<SweepDevice>) -> Result<Vec<PowerSweepPoint>, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| IoError::MissingHeader(e.to_string()))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    let key = match names.as_slice() {
        ["photon_number", "delta_i", "sigma"] => Key::PhotonNumber,
        ["power_dbm", "delta_i", "sigma"] => Key::PowerDbm,
        _ => {
            return Err(IoError::MissingHeader(format!(
                "expected photon_number,delta_i,sigma or power_dbm,delta_i,sigma, got {}",
                names.join(",")
            )))
        }
    };
    if key == Key::PowerDbm && device.is_none() {
        return Err(IoError::MissingDevice);
    }

    let mut points = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| IoError::Parse {
            line: row + 1,
            message: e.to_string(),
        })?;
        if record.len() != 3 {
            return Err(IoError::RowArity {
                line: row + 1,
                found: record.len(),
                expected: 3,
            });
        }
        let field = |k: usize| -> Result<f64, IoError> {
            record[k].parse::<f64>().map_err(|_| IoError::Parse {
                line: row + 1,
                message: format!("{} is not a number: {:?}", names[k], &record[k]),
            })
        };
        let (first, delta_i, sigma) = (field(0)?, field(1)?, field(2)?);
        let n = match (key, device) {
            (Key::PowerDbm, Some(d)) => photon_number(dbm_to_watts(first), d.f_r, d.q_l, d.qc_mag),
            _ => first,
        };
        let positive = |v: f64, column: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(IoError::NonPositiveValue {
                    row,
                    column: column.to_string(),
                })
            }
        };
        positive(n, names[0])?;
        positive(delta_i, "delta_i")?;
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(IoError::Parse {
                line: row + 1,
                message: format!("sigma {sigma} must be non-negative"),
            });
        }
        points.push(PowerSweepPoint::new(n, delta_i, sigma)?);
    }
    points.sort_by(|a, b| a.photon_number.total_cmp(&b.photon_number));
    Ok(points)
}

/// Writes a photon-number-keyed sweep.
pub fn write_sweep_csv(points: &[PowerSweepPoint]) -> String {
    let mut out = String::from("photon_number,delta_i,sigma\n");
    for p in points {
        let _ = writeln!(out, "{:e},{:e},{:e}", p.photon_number, p.delta_i, p.sigma);
    }
    out
}
