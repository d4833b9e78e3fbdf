//! Runs a small campaign: synthesized traces for one resonator at several
//! powers, fitted in parallel and assembled into a TLS fit.

use resonator_loss::campaign::{run_campaign, CampaignOptions};
use resonator_loss::constants::dbm_to_watts;
use resonator_loss::io::{write_report, write_touchstone, DataFormat, ReportDocument, ReportFormat};
use resonator_loss::model::{photon_number, tls_loss, BackgroundModel, ResonanceParams, TlsParams};
use resonator_loss::synth::{synth_trace, FrequencyGrid, NoiseModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("resloss-campaign-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let tls = TlsParams::new(2.8e-5, 3.7e-6, 30.0, 1.0, 5e9, 0.01)?;
    let qc = 1e5;
    let mut manifest = String::from("file,label,power_dbm,temperature_k\n");
    for (k, dbm) in (-160..=-80).step_by(10).enumerate() {
        let dbm = dbm as f64;
        // Q_l and ⟨n⟩ depend on each other; iterate to the self-consistent point
        let mut q_l = 1.0 / (tls.low_power_loss() + 1.0 / qc);
        for _ in 0..50 {
            q_l = 1.0 / (tls_loss(photon_number(dbm_to_watts(dbm), 5e9, q_l, qc), &tls) + 1.0 / qc);
        }
        let res = ResonanceParams::new(5e9, q_l, qc, 0.05)?;
        let noise = NoiseModel::isotropic(0.005 * res.diameter(), k as u64);
        let trace = synth_trace(&res, &BackgroundModel::IDENTITY, FrequencyGrid::around(&res, 20.0, 401), noise, None, None, "r1")?;
        let file = format!("r1_{k}.s2p");
        std::fs::write(dir.join(&file), write_touchstone(&trace, DataFormat::Ri))?;
        manifest.push_str(&format!("{file},r1,{dbm},0.01\n"));
    }
    std::fs::write(dir.join("manifest.csv"), manifest)?;

    let doc = run_campaign(&dir, CampaignOptions::default())?;
    for f in &doc.fits {
        println!(
            "{:>6.0} dBm  ⟨n⟩ {:>9.3e}  δ_i {:.3e}",
            f.power_dbm.unwrap_or(f64::NAN),
            f.photon_number.unwrap_or(f64::NAN),
            f.delta_i.unwrap_or(f64::NAN)
        );
    }
    print!("{}", write_report(&ReportDocument { fits: vec![], ..doc.clone() }, ReportFormat::Csv));
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
