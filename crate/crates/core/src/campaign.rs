//! Batch processing of a directory of traces described by a manifest.
//!
//! Every manifest row is fitted on a bounded worker pool. Fits sharing a
//! resonator label and temperature form one power sweep, which then goes
//! through the TLS fit. The report is keyed and sorted by label, so it does
//! not depend on manifest or discovery order.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::mpsc;

use rayon::prelude::*;

use crate::constants::dbm_to_watts;
use crate::fit::{fit_power_sweep, fit_resonance, FitConfig, FitError, FitResult, Partial};
use crate::io::report::{FailureRecord, FitRecord, ReportDocument, TlsRecord};
use crate::io::{parse_manifest, parse_touchstone, read_text, IoError, ManifestRow};
use crate::model::{photon_number, PowerSweepPoint, TraceMetadata};

/// Name of the manifest expected inside a campaign directory.
pub const MANIFEST_NAME: &str = "manifest.csv";

pub struct CampaignOptions {
    pub config: FitConfig,
    /// Worker threads for the per-trace fits; 0 picks the rayon default.
    pub workers: usize,
    /// Receives one JSON line per finished trace, written from a single thread.
    pub progress: Option<Box<dyn Write + Send>>,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        Self {
            config: FitConfig::default(),
            workers: 0,
            progress: None,
        }
    }
}

enum TraceOutcome {
    Fitted(FitRecord),
    Failed(FailureRecord),
}

fn failure(row: &ManifestRow, kind: &str, message: impl Into<String>) -> FailureRecord {
    FailureRecord {
        label: row.label.clone(),
        source: row.file.clone(),
        kind: kind.to_string(),
        message: message.into(),
    }
}

fn fit_record(fit: &FitResult, power_w: f64) -> FitRecord {
    let p = &fit.params;
    let n = photon_number(power_w, p.f_r, p.q_l, p.qc_mag);
    FitRecord::from_fit(fit, n.is_finite().then_some(n))
}

fn process_row(dir: &Path, row: &ManifestRow, cfg: &FitConfig) -> TraceOutcome {
    let power_w = dbm_to_watts(row.power_dbm);
    let traces = match read_text(dir.join(&row.file)).and_then(|t| parse_touchstone(&t, &row.label)) {
        Ok(t) => t,
        Err(e) => return TraceOutcome::Failed(failure(row, "input", e.to_string())),
    };
    if traces.len() != 1 {
        let msg = format!("expected one sweep, file holds {}", traces.len());
        return TraceOutcome::Failed(failure(row, "input", msg));
    }
    let mut trace = traces.into_iter().next().expect("length checked");
    trace.metadata = TraceMetadata::new(&row.label)
        .with_power(power_w)
        .with_temperature(row.temperature_k);
    match fit_resonance(&trace, cfg) {
        Ok(fit) => TraceOutcome::Fitted(fit_record(&fit, power_w)),
        Err(FitError::NotConverged {
            partial: Partial::Resonance(fit),
            ..
        }) => TraceOutcome::Fitted(fit_record(&fit, power_w)),
        Err(e @ FitError::NotConverged { .. }) => {
            TraceOutcome::Failed(failure(row, "not_converged", e.to_string()))
        }
        Err(e) => TraceOutcome::Failed(failure(row, "input", e.to_string())),
    }
}

/// Runs a campaign from `<dir>/manifest.csv`.
pub fn run_campaign(dir: &Path, opts: CampaignOptions) -> Result<ReportDocument, IoError> {
    let manifest = parse_manifest(&read_text(dir.join(MANIFEST_NAME))?)?;
    run_manifest(dir, &manifest, opts)
}

/// Runs a campaign over explicit manifest rows; files resolve against `dir`.
pub fn run_manifest(
    dir: &Path,
    manifest: &[ManifestRow],
    opts: CampaignOptions,
) -> Result<ReportDocument, IoError> {
    opts.config
        .validate()
        .map_err(|e| IoError::Report(e.to_string()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| IoError::Report(e.to_string()))?;
    let cfg = &opts.config;
    let (tx, rx) = mpsc::channel::<String>();
    let mut sink = opts.progress;
    let outcomes: Vec<TraceOutcome> = std::thread::scope(|s| {
        let writer = s.spawn(move || {
            for line in rx {
                if let Some(w) = sink.as_mut() {
                    // Progress output is advisory; a broken sink must not abort the batch.
                    let _ = writeln!(w, "{line}");
                }
            }
            if let Some(w) = sink.as_mut() {
                let _ = w.flush();
            }
        });
        let outcomes = pool.install(|| {
            manifest
                .par_iter()
                .map_with(tx, |tx, row| {
                    let out = process_row(dir, row, cfg);
                    let line = match &out {
                        TraceOutcome::Fitted(r) => serde_json::to_string(r),
                        TraceOutcome::Failed(r) => serde_json::to_string(r),
                    }
                    .expect("record serializes");
                    let _ = tx.send(line);
                    out
                })
                .collect()
        });
        writer.join().expect("progress writer does not panic");
        outcomes
    });

    let mut doc = ReportDocument::default();
    for out in outcomes {
        match out {
            TraceOutcome::Fitted(r) => doc.fits.push(r),
            TraceOutcome::Failed(r) => doc.failures.push(r),
        }
    }
    doc.fits.sort_by(|a, b| {
        (&a.label, a.temperature_k, a.power_dbm)
            .partial_cmp(&(&b.label, b.temperature_k, b.power_dbm))
            .expect("finite keys")
    });

    // Sweeps keyed by (label, temperature bits) so equal temperatures group exactly.
    let mut sweeps: BTreeMap<(String, u64), Vec<&FitRecord>> = BTreeMap::new();
    for r in doc.fits.iter().filter(|r| r.converged) {
        let t = r.temperature_k.expect("campaign fits carry temperature");
        sweeps.entry((r.label.clone(), t.to_bits())).or_default().push(r);
    }
    let mut tls = Vec::new();
    for ((label, t_bits), fits) in &sweeps {
        let temperature = f64::from_bits(*t_bits);
        let source = format!("{label} @ {temperature} K");
        let mut points = Vec::new();
        for f in fits {
            let (Some(n), Some(d)) = (f.photon_number, f.delta_i) else {
                continue;
            };
            match PowerSweepPoint::new(n, d, f.delta_i_sigma.unwrap_or(0.0)) {
                Ok(p) => points.push(p),
                Err(e) => doc.failures.push(FailureRecord {
                    label: label.clone(),
                    source: source.clone(),
                    kind: "input".into(),
                    message: e.to_string(),
                }),
            }
        }
        points.sort_by(|a, b| a.photon_number.total_cmp(&b.photon_number));
        let mut f_r: Vec<f64> = fits.iter().map(|f| f.f_r_hz).collect();
        f_r.sort_by(f64::total_cmp);
        let frequency = f_r[f_r.len() / 2];
        let kind_of = |e: &FitError| match e {
            FitError::NotConverged { .. } => "not_converged",
            FitError::UnidentifiableSaturation { .. } => "unidentifiable_saturation",
            _ => "input",
        };
        match fit_power_sweep(&points, frequency, temperature, cfg) {
            Ok(fit) => tls.push(TlsRecord::from_fit(label, &fit, points.len())),
            Err(e) => {
                if let FitError::NotConverged {
                    partial: Partial::Tls(fit),
                    ..
                } = &e
                {
                    tls.push(TlsRecord::from_fit(label, fit, points.len()));
                }
                doc.failures.push(FailureRecord {
                    label: label.clone(),
                    source,
                    kind: kind_of(&e).into(),
                    message: e.to_string(),
                });
            }
        }
    }
    doc.tls_fits = tls;
    doc.failures
        .sort_by(|a, b| (&a.label, &a.source, &a.kind).cmp(&(&b.label, &b.source, &b.kind)));
    Ok(doc)
}
