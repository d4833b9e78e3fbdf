//! Command-line front end. Exit codes: 0 success, 1 input error, 2 some fit
//! did not converge, 3 internal error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use resonator_loss::campaign::{run_campaign, CampaignOptions};
use resonator_loss::constants::dbm_to_watts;
use resonator_loss::design::{design_report, DesignSpec};
use resonator_loss::fit::{
    fit_power_sweep, fit_resonance, BetaMode, FitConfig, FitError, Partial,
};
use resonator_loss::io::catalog::render_catalog;
use resonator_loss::io::report::{DesignRecord, FailureRecord, FitRecord, TlsRecord};
use resonator_loss::io::{
    catalog_query, parse_sweep_csv, parse_touchstone, read_text, write_report, write_sweep_csv,
    write_touchstone, CatalogFilter, DataFormat, IoError, ReportDocument, ReportFormat,
    SweepDevice,
};
use resonator_loss::model::{photon_number, BackgroundModel, ResonanceParams, TlsParams};
use resonator_loss::synth::{
    log_grid, synth_power_sweep, synth_temperature_sweep, synth_trace, FrequencyGrid, NoiseModel,
};
use resonator_loss::Error;

#[derive(Parser)]
#[command(name = "resloss", version, about = "Notch-resonator loss extraction and lumped-element design")]
struct Cli {
    /// TOML file of fit settings (keys of FitConfig plus `workers`); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Output {
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: ReportFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Fit every sweep in a Touchstone file.
    Fit {
        trace: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        power_dbm: Option<f64>,
        #[arg(long)]
        temperature_k: Option<f64>,
        #[arg(long)]
        wing_fraction: Option<f64>,
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Fit the TLS model to a power-sweep CSV.
    SweepFit {
        csv: PathBuf,
        #[arg(long)]
        frequency_hz: f64,
        #[arg(long)]
        temperature_k: f64,
        /// `fixed:<beta>` or `free`.
        #[arg(long)]
        beta: Option<BetaMode>,
        /// Needed only for power-keyed sweeps.
        #[arg(long)]
        q_l: Option<f64>,
        #[arg(long)]
        qc_mag: Option<f64>,
        #[arg(long, default_value = "sweep")]
        label: String,
        #[command(flatten)]
        output: Output,
    },
    /// Fit every trace listed in `<dir>/manifest.csv` and every resulting power sweep.
    Campaign {
        dir: PathBuf,
        /// Worker threads; 0 uses one per core.
        #[arg(long)]
        workers: Option<usize>,
        /// Append one JSON line per finished trace to this file.
        #[arg(long)]
        progress: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Size the coupling capacitor across a frequency band.
    Design(DesignArgs),
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Query the bundled dielectric-loss benchmark; no filters dumps it verbatim.
    Catalog {
        #[arg(long)]
        material: Option<String>,
        #[arg(long)]
        reference: Option<String>,
        #[arg(long)]
        crystallinity: Option<String>,
        #[arg(long)]
        geometry: Option<String>,
        #[arg(long)]
        deposition: Option<String>,
        /// Plain loss, e.g. 5e-5.
        #[arg(long)]
        max_delta_lp: Option<f64>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long)]
    inductance_h: f64,
    #[arg(long)]
    shunt_capacitance_f: f64,
    #[arg(long)]
    thickness_m: f64,
    #[arg(long, default_value_t = resonator_loss::design::DEFAULT_EPS_R)]
    eps_r: f64,
    /// `lo:hi` in Hz, or a single frequency.
    #[arg(long, value_parser = parse_band)]
    band_hz: (f64, f64),
    #[arg(long, default_value_t = 0.99)]
    p_min: f64,
    /// F_L tanδ_L of the inductor.
    #[arg(long, default_value_t = 1e-4)]
    inductor_loss_bound: f64,
    #[arg(long, default_value_t = 3.2e-5)]
    delta_expected: f64,
    #[arg(long, default_value_t = 0.02)]
    max_misattribution: f64,
    #[arg(long, default_value_t = 9)]
    grid_points: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Touchstone trace of one resonance.
    Trace {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 5e9)]
        f_r_hz: f64,
        #[arg(long, default_value_t = 2e5)]
        q_i: f64,
        #[arg(long, default_value_t = 2e5)]
        qc_mag: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi: f64,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        tau_s: f64,
        /// Complex noise σ as a fraction of the circle diameter Q_l/|Q_c|.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 801)]
        points: usize,
        #[arg(long, default_value_t = 20.0)]
        linewidths: f64,
        #[arg(long, default_value = "ri")]
        data_format: DataFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Power-sweep CSV keyed by photon number.
    Sweep {
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        tls: TlsArgs,
        #[arg(long, default_value_t = 0.1)]
        n_min: f64,
        #[arg(long, default_value_t = 1e6)]
        n_max: f64,
        #[arg(long, default_value_t = 20)]
        per_decade: usize,
        /// Relative noise on δ_i.
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// `temperature_k,delta_i` CSV at fixed photon number.
    TempSweep {
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        tls: TlsArgs,
        #[arg(long, default_value_t = 0.01)]
        t_min_k: f64,
        #[arg(long, default_value_t = 1.0)]
        t_max_k: f64,
        #[arg(long, default_value_t = 25)]
        count: usize,
        #[arg(long, default_value_t = 1.0)]
        photon_number: f64,
        /// Relative noise on δ_i.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct TlsArgs {
    #[arg(long, default_value_t = 2.8e-5)]
    f_delta0: f64,
    #[arg(long, default_value_t = 1.0 / 2.7e5)]
    delta_other: f64,
    #[arg(long, default_value_t = 10.0)]
    n_c: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 5e9)]
    frequency_hz: f64,
    #[arg(long, default_value_t = 0.01)]
    temperature_k: f64,
}

impl TlsArgs {
    fn params(&self) -> Result<TlsParams, Error> {
        Ok(TlsParams::new(
            self.f_delta0,
            self.delta_other,
            self.n_c,
            self.beta,
            self.frequency_hz,
            self.temperature_k,
        )?)
    }
}

#[derive(Deserialize, Default)]
#[serde(default)]
struct FileConfig {
    #[serde(flatten)]
    fit: FitConfig,
    workers: Option<usize>,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Input(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    match s.split_once(':') {
        Some((lo, hi)) => Ok((num(lo)?, num(hi)?)),
        None => num(s).map(|f| (f, f)),
    }
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, Failure> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = read_text(path)?;
    toml::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// All output goes through here, so each command writes its result once.
fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    let res = match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| e.to_string()),
    };
    res.map_err(Failure::Internal)
}

fn fit_config(base: &FitConfig) -> Result<FitConfig, Failure> {
    base.validate().map_err(|e| Failure::Input(e.to_string()))?;
    Ok(base.clone())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let file = load_config(cli.config.as_deref())?;
    let mut cfg = file.fit;
    match cli.command {
        Command::Fit {
            trace,
            power_dbm,
            temperature_k,
            wing_fraction,
            label,
            seed,
            output,
        } => {
            if let Some(w) = wing_fraction {
                cfg.wing_fraction = w;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let cfg = fit_config(&cfg)?;
            let label = label.unwrap_or_else(|| {
                trace.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
            });
            let traces = parse_touchstone(&read_text(&trace)?, &label)?;
            let power = power_dbm.map(dbm_to_watts);
            let mut doc = ReportDocument::default();
            for mut t in traces {
                if let Some(p) = power {
                    t.metadata = t.metadata.with_power(p);
                }
                if let Some(k) = temperature_k {
                    t.metadata = t.metadata.with_temperature(k);
                }
                let fit = match fit_resonance(&t, &cfg) {
                    Ok(f) => f,
                    Err(FitError::NotConverged {
                        partial: Partial::Resonance(f),
                        ..
                    }) => *f,
                    Err(e) => {
                        doc.failures.push(FailureRecord {
                            label: t.metadata.label.clone(),
                            source: trace.display().to_string(),
                            kind: if matches!(e, FitError::NotConverged { .. }) {
                                "not_converged"
                            } else {
                                "input"
                            }
                            .into(),
                            message: e.to_string(),
                        });
                        continue;
                    }
                };
                let n = power.map(|p| photon_number(p, fit.params.f_r, fit.params.q_l, fit.params.qc_mag));
                doc.fits.push(FitRecord::from_fit(&fit, n));
            }
            if doc.fits.is_empty() && doc.failures.iter().all(|f| f.kind == "input") {
                let msg = doc.failures.iter().map(|f| f.message.as_str()).collect::<Vec<_>>();
                return Err(Failure::Input(msg.join("; ")));
            }
            emit(output.out.as_deref(), &write_report(&doc, output.format))?;
            Ok(!doc.any_not_converged())
        }
        Command::SweepFit {
            csv,
            frequency_hz,
            temperature_k,
            beta,
            q_l,
            qc_mag,
            label,
            output,
        } => {
            if let Some(b) = beta {
                cfg.beta_mode = b;
            }
            let cfg = fit_config(&cfg)?;
            let device = match (q_l, qc_mag) {
                (Some(q_l), Some(qc_mag)) => Some(SweepDevice {
                    f_r: frequency_hz,
                    q_l,
                    qc_mag,
                }),
                _ => None,
            };
            let points = parse_sweep_csv(&read_text(&csv)?, device)?;
            let mut doc = ReportDocument::default();
            match fit_power_sweep(&points, frequency_hz, temperature_k, &cfg) {
                Ok(fit) => doc.tls_fits.push(TlsRecord::from_fit(&label, &fit, points.len())),
                Err(FitError::NotConverged {
                    partial: Partial::Tls(fit),
                    ..
                }) => doc.tls_fits.push(TlsRecord::from_fit(&label, &fit, points.len())),
                Err(e) => return Err(Failure::Input(e.to_string())),
            }
            emit(output.out.as_deref(), &write_report(&doc, output.format))?;
            Ok(!doc.any_not_converged())
        }
        Command::Campaign {
            dir,
            workers,
            progress,
            output,
        } => {
            let cfg = fit_config(&cfg)?;
            let sink: Option<Box<dyn Write + Send>> = match progress {
                Some(p) => Some(Box::new(
                    std::fs::OpenOptions::new()
                        .create(true)
                        .append(true)
                        .open(&p)
                        .map_err(|e| Failure::Internal(format!("{}: {e}", p.display())))?,
                )),
                None => None,
            };
            let opts = CampaignOptions {
                config: cfg,
                workers: workers.or(file.workers).unwrap_or(0),
                progress: sink,
            };
            let doc = run_campaign(&dir, opts)?;
            emit(output.out.as_deref(), &write_report(&doc, output.format))?;
            Ok(!doc.any_not_converged())
        }
        Command::Design(a) => {
            let spec = DesignSpec {
                eps_r: a.eps_r,
                p_min: a.p_min,
                inductor_loss_bound: a.inductor_loss_bound,
                delta_expected: a.delta_expected,
                max_misattribution: a.max_misattribution,
                grid_points: a.grid_points,
                ..DesignSpec::new(a.inductance_h, a.shunt_capacitance_f, a.thickness_m, a.band_hz)
            };
            let report = design_report(&spec).map_err(Error::from)?;
            let doc = ReportDocument {
                designs: DesignRecord::from_report(&report),
                ..ReportDocument::default()
            };
            emit(a.output.out.as_deref(), &write_report(&doc, a.output.format))?;
            Ok(true)
        }
        Command::Synth(cmd) => {
            synth(cmd)?;
            Ok(true)
        }
        Command::Catalog {
            material,
            reference,
            crystallinity,
            geometry,
            deposition,
            max_delta_lp,
            json,
            out,
        } => {
            let filter = CatalogFilter {
                material,
                reference,
                deposition,
                crystallinity,
                geometry,
                max_delta_lp,
            };
            let rows = catalog_query(&filter);
            let text = if json {
                let mut s = serde_json::to_string_pretty(&rows)
                    .map_err(|e| Failure::Internal(e.to_string()))?;
                s.push('\n');
                s
            } else {
                render_catalog(&rows)
            };
            emit(out.as_deref(), &text)?;
            Ok(true)
        }
    }
}

fn synth(cmd: SynthCommand) -> Result<(), Failure> {
    match cmd {
        SynthCommand::Trace {
            seed,
            f_r_hz,
            q_i,
            qc_mag,
            phi,
            amplitude,
            alpha,
            tau_s,
            noise,
            points,
            linewidths,
            data_format,
            out,
        } => {
            let q_l = 1.0 / (1.0 / q_i + phi.cos() / qc_mag);
            let res = ResonanceParams::new(f_r_hz, q_l, qc_mag, phi).map_err(Error::from)?;
            let bg = BackgroundModel::new(amplitude, alpha, tau_s).map_err(Error::from)?;
            let model = NoiseModel::isotropic(noise * res.diameter(), seed);
            let grid = FrequencyGrid::around(&res, linewidths, points);
            let trace = synth_trace(&res, &bg, grid, model, None, None, "synthetic").map_err(Error::from)?;
            emit(out.as_deref(), &write_touchstone(&trace, data_format))
        }
        SynthCommand::Sweep {
            seed,
            tls,
            n_min,
            n_max,
            per_decade,
            noise,
            out,
        } => {
            let p = tls.params()?;
            let ns = log_grid(n_min, n_max, per_decade);
            let points = synth_power_sweep(&p, &ns, NoiseModel::relative(noise, seed)).map_err(Error::from)?;
            emit(out.as_deref(), &write_sweep_csv(&points))
        }
        SynthCommand::TempSweep {
            seed,
            tls,
            t_min_k,
            t_max_k,
            count,
            photon_number,
            noise,
            out,
        } => {
            let p = tls.params()?;
            if count < 2 || !(t_min_k > 0.0 && t_max_k > t_min_k) {
                return Err(Failure::Input("need count ≥ 2 and 0 < t_min_k < t_max_k".into()));
            }
            let ts: Vec<f64> = (0..count)
                .map(|k| t_min_k + (t_max_k - t_min_k) * k as f64 / (count - 1) as f64)
                .collect();
            let rows = synth_temperature_sweep(&p, &ts, photon_number, NoiseModel::relative(noise, seed)).map_err(Error::from)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let internal = |e: csv::Error| Failure::Internal(e.to_string());
            w.write_record(["temperature_k", "delta_i"]).map_err(internal)?;
            for (t, d) in rows {
                w.write_record([t.to_string(), d.to_string()]).map_err(internal)?;
            }
            let bytes = w.into_inner().map_err(|e| Failure::Internal(e.to_string()))?;
            emit(out.as_deref(), &String::from_utf8_lossy(&bytes))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("resloss: at least one fit did not converge; see the report");
            ExitCode::from(2)
        }
        Err(Failure::Input(m)) => {
            eprintln!("resloss: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("resloss: internal error: {m}");
            ExitCode::from(3)
        }
    }
}
