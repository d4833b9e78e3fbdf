//! Versioned result reports in JSON or sectioned CSV.
//!
//! Numeric column names carry a unit suffix (`_hz`, `_s`, `_f`, ...) and the
//! unit of every column, `1` for dimensionless, is listed in the schema: a
//! `units` object in JSON and a `#units=` line under each CSV table header.
//! Floats are written in shortest round-trip form, so write → parse → write
//! is byte-stable in both formats.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::design::{DesignEntry, DesignReport};
use crate::fit::{propagate_uncertainty, FitResult, TlsFit, Weighting};

pub const SCHEMA_VERSION: u32 = 1;

/// Photon-number convention attached to every report.
pub const PHOTON_NUMBER_CONVENTION: &str =
    "notch: <n> = 2 P Q_l^2 / (|Q_c| hbar omega_r^2), P = power at the resonator input";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = IoError;

    fn from_str(s: &str) -> Result<Self, IoError> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(IoError::UnsupportedFormat(format!("report format {other:?}"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        })
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// One resonance fit. Sigmas are 1σ from the covariance; `None` when not finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub label: String,
    pub power_dbm: Option<f64>,
    pub temperature_k: Option<f64>,
    pub photon_number: Option<f64>,
    pub f_r_hz: f64,
    pub f_r_sigma_hz: Option<f64>,
    pub q_l: f64,
    pub q_l_sigma: Option<f64>,
    pub qc_mag: f64,
    pub qc_mag_sigma: Option<f64>,
    pub phi_rad: f64,
    pub phi_sigma_rad: Option<f64>,
    pub q_i: Option<f64>,
    pub q_i_sigma: Option<f64>,
    pub delta_i: Option<f64>,
    pub delta_i_sigma: Option<f64>,
    pub amplitude: f64,
    pub phase_offset_rad: f64,
    pub cable_delay_s: f64,
    pub residual_norm: f64,
    pub iterations: u64,
    pub converged: bool,
    pub singular: bool,
}

const FIT_UNITS: [(&str, &str); 23] = [
    ("label", ""),
    ("power_dbm", "dBm"),
    ("temperature_k", "K"),
    ("photon_number", "1"),
    ("f_r_hz", "Hz"),
    ("f_r_sigma_hz", "Hz"),
    ("q_l", "1"),
    ("q_l_sigma", "1"),
    ("qc_mag", "1"),
    ("qc_mag_sigma", "1"),
    ("phi_rad", "rad"),
    ("phi_sigma_rad", "rad"),
    ("q_i", "1"),
    ("q_i_sigma", "1"),
    ("delta_i", "1"),
    ("delta_i_sigma", "1"),
    ("amplitude", "1"),
    ("phase_offset_rad", "rad"),
    ("cable_delay_s", "s"),
    ("residual_norm", "1"),
    ("iterations", "1"),
    ("converged", ""),
    ("singular", ""),
];

impl FitRecord {
    /// `photon_number` is supplied by the caller, who knows the feed power.
    pub fn from_fit(fit: &FitResult, photon_number: Option<f64>) -> Self {
        let u = propagate_uncertainty(fit);
        let sigma = |name: &str| u.get(name).and_then(|p| finite(p.sigma));
        let temperature_k = fit.metadata.temperature;
        let power_dbm = fit.metadata.applied_power.map(crate::constants::watts_to_dbm);
        Self {
            label: fit.metadata.label.clone(),
            power_dbm,
            temperature_k,
            photon_number,
            f_r_hz: fit.params.f_r,
            f_r_sigma_hz: sigma("f_r"),
            q_l: fit.params.q_l,
            q_l_sigma: sigma("q_l"),
            qc_mag: fit.params.qc_mag,
            qc_mag_sigma: sigma("qc_mag"),
            phi_rad: fit.params.phi,
            phi_sigma_rad: sigma("phi"),
            q_i: fit.loss.map(|l| l.q_i),
            q_i_sigma: fit.loss.and(sigma("q_i")),
            delta_i: fit.loss.map(|l| l.delta_i),
            delta_i_sigma: fit.loss.and(sigma("delta_i")),
            amplitude: fit.background.amplitude,
            phase_offset_rad: fit.background.phase_offset,
            cable_delay_s: fit.background.cable_delay,
            residual_norm: fit.residual_norm,
            iterations: fit.iterations as u64,
            converged: fit.converged,
            singular: fit.diagnostics.singular,
        }
    }
}

/// One power-sweep TLS fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TlsRecord {
    pub label: String,
    pub frequency_hz: f64,
    pub temperature_k: f64,
    pub points: u64,
    pub f_delta0: f64,
    pub f_delta0_sigma: Option<f64>,
    pub delta_other: f64,
    pub delta_other_sigma: Option<f64>,
    pub n_c: f64,
    pub n_c_sigma: Option<f64>,
    pub beta: f64,
    /// `None` when β was held fixed.
    pub beta_sigma: Option<f64>,
    pub beta_free: bool,
    pub delta_lp: f64,
    pub delta_lp_sigma: Option<f64>,
    pub q_max: f64,
    pub q_max_sigma: Option<f64>,
    pub weighting: String,
    pub residual_norm: f64,
    pub iterations: u64,
    pub converged: bool,
    pub singular: bool,
}

const TLS_UNITS: [(&str, &str); 22] = [
    ("label", ""),
    ("frequency_hz", "Hz"),
    ("temperature_k", "K"),
    ("points", "1"),
    ("f_delta0", "1"),
    ("f_delta0_sigma", "1"),
    ("delta_other", "1"),
    ("delta_other_sigma", "1"),
    ("n_c", "1"),
    ("n_c_sigma", "1"),
    ("beta", "1"),
    ("beta_sigma", "1"),
    ("beta_free", ""),
    ("delta_lp", "1"),
    ("delta_lp_sigma", "1"),
    ("q_max", "1"),
    ("q_max_sigma", "1"),
    ("weighting", ""),
    ("residual_norm", "1"),
    ("iterations", "1"),
    ("converged", ""),
    ("singular", ""),
];

impl TlsRecord {
    pub fn from_fit(label: &str, fit: &TlsFit, points: usize) -> Self {
        let u = propagate_uncertainty(fit);
        let sigma = |name: &str| u.get(name).and_then(|p| finite(p.sigma));
        Self {
            label: label.to_string(),
            frequency_hz: fit.params.frequency,
            temperature_k: fit.params.temperature,
            points: points as u64,
            f_delta0: fit.params.f_delta0,
            f_delta0_sigma: sigma("f_delta0"),
            delta_other: fit.params.delta_other,
            delta_other_sigma: sigma("delta_other"),
            n_c: fit.params.n_c,
            n_c_sigma: sigma("n_c"),
            beta: fit.params.beta,
            beta_sigma: if fit.beta_free { sigma("beta") } else { None },
            beta_free: fit.beta_free,
            delta_lp: fit.delta_lp,
            delta_lp_sigma: sigma("delta_lp"),
            q_max: fit.q_max,
            q_max_sigma: sigma("q_max"),
            weighting: match fit.weighting {
                Weighting::InverseVariance => "inverse_variance",
                Weighting::Uniform => "uniform",
            }
            .to_string(),
            residual_norm: fit.residual_norm,
            iterations: fit.diagnostics.iterations as u64,
            converged: fit.converged,
            singular: fit.diagnostics.singular,
        }
    }
}

/// One target frequency of a design sweep. Geometry columns are empty when
/// the target is unreachable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignRecord {
    pub f_target_hz: f64,
    pub feasible: bool,
    pub inductance_h: f64,
    pub shunt_capacitance_f: f64,
    pub coupling_capacitance_f: Option<f64>,
    pub thickness_m: f64,
    pub eps_r: f64,
    pub area_m2: Option<f64>,
    pub disc_radius_m: Option<f64>,
    pub participation: Option<f64>,
    pub inductor_loss_bound: f64,
    pub misattribution: Option<f64>,
    pub misattribution_relative: Option<f64>,
    pub p_required: f64,
    /// Reasons for infeasibility joined with "; ".
    pub reasons: String,
}

const DESIGN_UNITS: [(&str, &str); 15] = [
    ("f_target_hz", "Hz"),
    ("feasible", ""),
    ("inductance_h", "H"),
    ("shunt_capacitance_f", "F"),
    ("coupling_capacitance_f", "F"),
    ("thickness_m", "m"),
    ("eps_r", "1"),
    ("area_m2", "m^2"),
    ("disc_radius_m", "m"),
    ("participation", "1"),
    ("inductor_loss_bound", "1"),
    ("misattribution", "1"),
    ("misattribution_relative", "1"),
    ("p_required", "1"),
    ("reasons", ""),
];

impl DesignRecord {
    pub fn from_entry(report: &DesignReport, entry: &DesignEntry) -> Self {
        let s = &report.spec;
        let d = entry.design.as_ref();
        Self {
            f_target_hz: entry.f_target,
            feasible: entry.feasible,
            inductance_h: s.inductance,
            shunt_capacitance_f: s.shunt_capacitance,
            coupling_capacitance_f: d.map(|d| d.coupling_capacitance),
            thickness_m: s.thickness,
            eps_r: s.eps_r,
            area_m2: d.map(|d| d.area),
            disc_radius_m: d.map(|d| d.disc_radius),
            participation: d.map(|d| d.participation),
            inductor_loss_bound: s.inductor_loss_bound,
            misattribution: d.map(|d| d.misattribution.additive),
            misattribution_relative: d.map(|d| d.misattribution.relative),
            p_required: report.p_required,
            reasons: entry.reasons.join("; "),
        }
    }

    pub fn from_report(report: &DesignReport) -> Vec<Self> {
        report.entries.iter().map(|e| Self::from_entry(report, e)).collect()
    }
}

/// A trace or sweep that produced no usable result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub label: String,
    pub source: String,
    /// `input`, `not_converged`, `unidentifiable_saturation` or `internal`.
    pub kind: String,
    pub message: String,
}

const FAILURE_UNITS: [(&str, &str); 4] = [("label", ""), ("source", ""), ("kind", ""), ("message", "")];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportDocument {
    pub fits: Vec<FitRecord>,
    pub tls_fits: Vec<TlsRecord>,
    pub designs: Vec<DesignRecord>,
    pub failures: Vec<FailureRecord>,
}

impl ReportDocument {
    /// True when any fit, TLS fit or recorded failure did not converge.
    pub fn any_not_converged(&self) -> bool {
        self.fits.iter().any(|f| !f.converged)
            || self.tls_fits.iter().any(|f| !f.converged)
            || self.failures.iter().any(|f| f.kind == "not_converged")
    }
}

type Units = BTreeMap<&'static str, BTreeMap<&'static str, &'static str>>;

fn units() -> Units {
    let table = |cols: &[(&'static str, &'static str)]| {
        cols.iter().filter(|(_, u)| !u.is_empty()).copied().collect()
    };
    BTreeMap::from([
        ("fits", table(&FIT_UNITS)),
        ("tls_fits", table(&TLS_UNITS)),
        ("designs", table(&DESIGN_UNITS)),
        ("failures", table(&FAILURE_UNITS)),
    ])
}

#[derive(Serialize)]
struct JsonOut<'a> {
    schema_version: u32,
    photon_number_convention: &'a str,
    units: Units,
    #[serde(flatten)]
    body: &'a ReportDocument,
}

#[derive(Deserialize)]
struct JsonIn {
    schema_version: u32,
    #[serde(flatten)]
    body: ReportDocument,
}

pub fn write_report(doc: &ReportDocument, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let out = JsonOut {
                schema_version: SCHEMA_VERSION,
                photon_number_convention: PHOTON_NUMBER_CONVENTION,
                units: units(),
                body: doc,
            };
            let mut s = serde_json::to_string_pretty(&out).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Csv => write_csv(doc),
    }
}

pub fn parse_report(text: &str, format: ReportFormat) -> Result<ReportDocument, IoError> {
    match format {
        ReportFormat::Json => {
            let doc: JsonIn = serde_json::from_str(text).map_err(|e| IoError::Parse {
                line: e.line(),
                message: e.to_string(),
            })?;
            check_version(doc.schema_version)?;
            Ok(doc.body)
        }
        ReportFormat::Csv => parse_csv(text),
    }
}

fn check_version(v: u32) -> Result<(), IoError> {
    if v == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(IoError::Report(format!(
            "schema_version {v} is not supported (expected {SCHEMA_VERSION})"
        )))
    }
}

fn write_table<T: Serialize>(out: &mut String, name: &str, cols: &[(&str, &str)], rows: &[T]) {
    if rows.is_empty() {
        return;
    }
    out.push_str(&format!("#table={name}\n"));
    let unit_line: Vec<&str> = cols.iter().map(|(_, u)| *u).collect();
    out.push_str(&format!("#units={}\n", unit_line.join(",")));
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    out.push_str(std::str::from_utf8(&w.into_inner().expect("in-memory flush")).expect("utf-8"));
}

fn write_csv(doc: &ReportDocument) -> String {
    let mut out = format!(
        "#schema_version={SCHEMA_VERSION}\n#photon_number_convention={PHOTON_NUMBER_CONVENTION}\n"
    );
    write_table(&mut out, "fits", &FIT_UNITS, &doc.fits);
    write_table(&mut out, "tls_fits", &TLS_UNITS, &doc.tls_fits);
    write_table(&mut out, "designs", &DESIGN_UNITS, &doc.designs);
    write_table(&mut out, "failures", &FAILURE_UNITS, &doc.failures);
    out
}

struct Section<'a> {
    name: &'a str,
    /// 1-based line number of the table header row.
    first_line: usize,
    body: String,
}

fn read_table<T: for<'de> Deserialize<'de>>(
    sec: &Section<'_>,
    cols: &[(&str, &str)],
) -> Result<Vec<T>, IoError> {
    let mut r = csv::ReaderBuilder::new().from_reader(sec.body.as_bytes());
    let headers = r.headers().map_err(|e| IoError::MissingHeader(e.to_string()))?;
    if headers.iter().ne(cols.iter().map(|(n, _)| *n)) {
        return Err(IoError::MissingHeader(format!(
            "table {}: {}",
            sec.name,
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.deserialize()
        .enumerate()
        .map(|(k, row)| {
            row.map_err(|e| IoError::Parse {
                line: sec.first_line + 1 + k,
                message: e.to_string(),
            })
        })
        .collect()
}

fn parse_csv(text: &str) -> Result<ReportDocument, IoError> {
    let mut version = None;
    let mut sections: Vec<Section> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if let Some(directive) = line.strip_prefix('#') {
            let (key, value) = directive.split_once('=').ok_or_else(|| IoError::Parse {
                line: lineno,
                message: format!("malformed directive {line:?}"),
            })?;
            match key {
                "schema_version" => {
                    version = Some(value.parse::<u32>().map_err(|e| IoError::Parse {
                        line: lineno,
                        message: e.to_string(),
                    })?)
                }
                "table" => {
                    let name = match value {
                        "fits" | "tls_fits" | "designs" | "failures" => value,
                        other => {
                            return Err(IoError::Parse {
                                line: lineno,
                                message: format!("unknown table {other:?}"),
                            })
                        }
                    };
                    sections.push(Section {
                        name,
                        first_line: lineno + 2,
                        body: String::new(),
                    });
                }
                "photon_number_convention" | "units" => {}
                other => {
                    return Err(IoError::Parse {
                        line: lineno,
                        message: format!("unknown directive {other:?}"),
                    })
                }
            }
            continue;
        }
        let sec = sections.last_mut().ok_or_else(|| IoError::Parse {
            line: lineno,
            message: "data before any #table= directive".into(),
        })?;
        sec.body.push_str(line);
        sec.body.push('\n');
    }
    check_version(version.ok_or_else(|| IoError::Report("missing schema_version".into()))?)?;
    let mut doc = ReportDocument::default();
    for sec in &sections {
        match sec.name {
            "fits" => doc.fits.extend(read_table(sec, &FIT_UNITS)?),
            "tls_fits" => doc.tls_fits.extend(read_table(sec, &TLS_UNITS)?),
            "designs" => doc.designs.extend(read_table(sec, &DESIGN_UNITS)?),
            _ => doc.failures.extend(read_table(sec, &FAILURE_UNITS)?),
        }
    }
    Ok(doc)
}
