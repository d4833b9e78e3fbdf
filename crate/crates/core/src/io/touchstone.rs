//! Touchstone v1 two-port reader and writer.
//!
//! Only S-parameter files are accepted. Rows hold nine numbers (frequency,
//! then S11, S21, S12, S22 as pairs); S21 is taken from the second pair.

use std::f64::consts::PI;
use std::fmt::Write;

use num_complex::Complex64;

use super::IoError;
use crate::model::{FrequencyTrace, TraceMetadata};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// real, imaginary
    Ri,
    /// magnitude, angle in degrees
    Ma,
    /// 20·log10 magnitude, angle in degrees
    Db,
}

impl DataFormat {
    fn decode(self, x: f64, y: f64) -> Complex64 {
        match self {
            DataFormat::Ri => Complex64::new(x, y),
            DataFormat::Ma => Complex64::from_polar(x, y.to_radians()),
            DataFormat::Db => Complex64::from_polar(10f64.powf(x / 20.0), y.to_radians()),
        }
    }

    fn encode(self, z: Complex64) -> (f64, f64) {
        match self {
            DataFormat::Ri => (z.re, z.im),
            DataFormat::Ma => (z.norm(), z.arg() * 180.0 / PI),
            DataFormat::Db => (20.0 * z.norm().log10(), z.arg() * 180.0 / PI),
        }
    }

    fn keyword(self) -> &'static str {
        match self {
            DataFormat::Ri => "RI",
            DataFormat::Ma => "MA",
            DataFormat::Db => "DB",
        }
    }
}

impl std::str::FromStr for DataFormat {
    type Err = IoError;

    fn from_str(s: &str) -> Result<Self, IoError> {
        match s.to_ascii_uppercase().as_str() {
            "RI" => Ok(DataFormat::Ri),
            "MA" => Ok(DataFormat::Ma),
            "DB" => Ok(DataFormat::Db),
            other => Err(IoError::UnsupportedFormat(format!("data format {other:?}"))),
        }
    }
}

/// Parsed option line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionLine {
    /// Multiplier from file units to Hz.
    pub frequency_scale: f64,
    pub format: DataFormat,
    pub reference_ohms: f64,
}

impl Default for OptionLine {
    /// Touchstone defaults: `# GHZ S MA R 50`.
    fn default() -> Self {
        Self {
            frequency_scale: 1e9,
            format: DataFormat::Ma,
            reference_ohms: 50.0,
        }
    }
}

fn parse_option_line(line: &str, line_no: usize) -> Result<OptionLine, IoError> {
    let malformed = |msg: String| IoError::MalformedOptionLine { line: line_no, message: msg };
    let mut opt = OptionLine::default();
    let mut tokens = line.trim_start_matches('#').split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opt.frequency_scale = 1.0,
            "KHZ" => opt.frequency_scale = 1e3,
            "MHZ" => opt.frequency_scale = 1e6,
            "GHZ" => opt.frequency_scale = 1e9,
            "S" => {}
            p @ ("Y" | "Z" | "H" | "G") => {
                return Err(IoError::UnsupportedFormat(format!(
                    "{p}-parameters; only S-parameters are supported"
                )))
            }
            "RI" => opt.format = DataFormat::Ri,
            "MA" => opt.format = DataFormat::Ma,
            "DB" => opt.format = DataFormat::Db,
            "R" => {
                let value = tokens
                    .next()
                    .ok_or_else(|| malformed("R without a reference impedance".into()))?;
                opt.reference_ohms = value
                    .parse()
                    .map_err(|_| malformed(format!("bad reference impedance {value:?}")))?;
            }
            other => return Err(malformed(format!("unknown token {other:?}"))),
        }
    }
    Ok(opt)
}

/// Every data row as (frequency in Hz, S21), in file order and without any
/// trace-level validation.
pub fn parse_touchstone_rows(text: &str) -> Result<Vec<(f64, Complex64)>, IoError> {
    let mut option: Option<OptionLine> = None;
    let mut rows = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('!').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('#') {
            if option.is_some() {
                return Err(IoError::MalformedOptionLine {
                    line: line_no,
                    message: "second option line".into(),
                });
            }
            option = Some(parse_option_line(content, line_no)?);
            continue;
        }
        let opt = option.ok_or(IoError::MalformedOptionLine {
            line: line_no,
            message: "data before the option line".into(),
        })?;
        let values = content
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| IoError::Parse {
                    line: line_no,
                    message: format!("not a number: {t:?}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        match values.len() {
            9 => {}
            3 => {
                return Err(IoError::UnsupportedFormat(format!(
                    "line {line_no}: one-port data; only two-port files are supported"
                )))
            }
            n => {
                return Err(IoError::RowArity {
                    line: line_no,
                    found: n,
                    expected: 9,
                })
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(IoError::Parse {
                line: line_no,
                message: "non-finite value".into(),
            });
        }
        rows.push((values[0] * opt.frequency_scale, opt.format.decode(values[3], values[4])));
    }
    if option.is_none() {
        return Err(IoError::MalformedOptionLine {
            line: 0,
            message: "missing option line".into(),
        });
    }
    Ok(rows)
}

/// Reads a two-port Touchstone file into S21 traces.
///
/// A new trace starts whenever the frequency fails to increase, so files that
/// concatenate several sweeps yield one trace per sweep. Labels are `label`
/// for a single sweep and `label#k` otherwise.
pub fn parse_touchstone(text: &str, label: &str) -> Result<Vec<FrequencyTrace>, IoError> {
    let mut segments: Vec<(Vec<f64>, Vec<Complex64>)> = vec![(Vec::new(), Vec::new())];
    for (f, s21) in parse_touchstone_rows(text)? {
        let current = segments.last_mut().expect("non-empty");
        if current.0.last().is_some_and(|&last| f <= last) {
            segments.push((vec![f], vec![s21]));
        } else {
            current.0.push(f);
            current.1.push(s21);
        }
    }
    let multi = segments.len() > 1;
    segments
        .into_iter()
        .enumerate()
        .map(|(k, (f, z))| {
            let name = if multi { format!("{label}#{k}") } else { label.to_string() };
            FrequencyTrace::new(f, z, TraceMetadata::new(name)).map_err(IoError::from)
        })
        .collect()
}

/// Writes a trace as a two-port Touchstone file in Hz. S21 and S12 carry the
/// trace; S11 and S22 are zero.
pub fn write_touchstone(trace: &FrequencyTrace, format: DataFormat) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "! {}", trace.metadata.label);
    let _ = writeln!(out, "# HZ S {} R 50", format.keyword());
    let zero = format.encode(Complex64::new(0.0, 0.0));
    let zero = if format == DataFormat::Db { (-400.0, 0.0) } else { zero };
    for (f, z) in trace.points() {
        let (x, y) = format.encode(z);
        let _ = writeln!(
            out,
            "{f:e} {:e} {:e} {x:e} {y:e} {x:e} {y:e} {:e} {:e}",
            zero.0, zero.1, zero.0, zero.1
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const RI: &str = "! minimal\n# GHz S RI R 50\n\
        5.0 0 0 0.9 0.1 0.9 0.1 0 0\n\
        5.1 0 0 0.5 -0.2 0.5 -0.2 0 0 ! inline comment\n\
        5.2 0 0 0.8 0.3 0.8 0.3 0 0\n";

    fn pad(text: &str, rows: usize) -> String {
        // repeat rows with increasing frequency so the trace meets the minimum length
        let mut out = String::from("# MHz S RI R 50\n");
        for i in 0..rows {
            out.push_str(&format!("{} {text}\n", 5000.0 + i as f64));
        }
        out
    }

    #[test]
    fn option_line_defaults_and_units() {
        let o = parse_option_line("#", 1).unwrap();
        assert_eq!(o, OptionLine::default());
        let o = parse_option_line("# khz s db r 75", 1).unwrap();
        assert_eq!(o.frequency_scale, 1e3);
        assert_eq!(o.format, DataFormat::Db);
        assert_eq!(o.reference_ohms, 75.0);
        assert!(parse_option_line("# GHz S RI R", 3).is_err());
        assert!(matches!(
            parse_option_line("# GHz Z RI R 50", 1),
            Err(IoError::UnsupportedFormat(_))
        ));
        assert!(matches!(
            parse_option_line("# GHz S XY R 50", 4),
            Err(IoError::MalformedOptionLine { line: 4, .. })
        ));
    }

    #[test]
    fn minimal_file_extracts_s21() {
        let rows = parse_touchstone_rows(RI).unwrap();
        assert_eq!(
            rows,
            vec![
                (5.0e9, Complex64::new(0.9, 0.1)),
                (5.1e9, Complex64::new(0.5, -0.2)),
                (5.2e9, Complex64::new(0.8, 0.3)),
            ]
        );
        // three rows are below the trace minimum
        let err = parse_touchstone(RI, "x").unwrap_err();
        assert!(matches!(err, IoError::Model(_)));
        let text = pad("0 0 0.9 0.1 0.9 0.1 0 0", 20);
        let traces = parse_touchstone(&text, "x").unwrap();
        assert_eq!(traces.len(), 1);
        assert_eq!(traces[0].frequencies()[1], 5001e6);
        assert_eq!(traces[0].transmission()[0], Complex64::new(0.9, 0.1));
    }

    #[test]
    fn arity_error_names_line() {
        let text = "! c\n# GHz S RI R 50\n5.0 0 0 0.9 0.1 0.9 0.1 0\n";
        match parse_touchstone(text, "x") {
            Err(IoError::RowArity { line, found, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(found, 8);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn one_port_is_unsupported() {
        let text = "# GHz S RI R 50\n5.0 0.9 0.1\n";
        assert!(matches!(parse_touchstone(text, "x"), Err(IoError::UnsupportedFormat(_))));
    }

    #[test]
    fn bad_number_names_line() {
        let text = "# GHz S RI R 50\n5.0 0 0 0.9 abc 0.9 0.1 0 0\n";
        assert!(matches!(parse_touchstone(text, "x"), Err(IoError::Parse { line: 2, .. })));
    }

    #[test]
    fn concatenated_sweeps_split() {
        let mut text = pad("0 0 0.9 0.1 0.9 0.1 0 0", 20);
        for i in 0..20 {
            text.push_str(&format!("{} 0 0 0.5 0.1 0.5 0.1 0 0\n", 5000.0 + i as f64));
        }
        let traces = parse_touchstone(&text, "dev").unwrap();
        assert_eq!(traces.len(), 2);
        assert_eq!(traces[1].metadata.label, "dev#1");
    }
}
