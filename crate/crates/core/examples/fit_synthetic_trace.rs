//! Generates a noisy notch trace with cable delay and recovers Q_i.

use resonator_loss::fit::{fit_resonance, FitConfig};
use resonator_loss::model::{BackgroundModel, ResonanceParams};
use resonator_loss::synth::{synth_trace, FrequencyGrid, NoiseModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Q_i = 3e5, |Q_c| = 1e5, slight impedance mismatch
    let (q_i, qc, phi) = (3e5_f64, 1e5_f64, 0.12_f64);
    let q_l = 1.0 / (1.0 / q_i + phi.cos() / qc);
    let truth = ResonanceParams::new(5.2e9, q_l, qc, phi)?;
    let bg = BackgroundModel::new(0.4, 1.1, 62e-9)?;

    let noise = NoiseModel::isotropic(0.02 * truth.diameter() * bg.amplitude, 2024);
    let trace = synth_trace(&truth, &bg, FrequencyGrid::around(&truth, 20.0, 801), noise, None, None, "demo")?;
    let fit = fit_resonance(&trace, &FitConfig::default())?;

    println!("f_r   {:.6e} Hz  (true {:.6e})", fit.params.f_r, truth.f_r);
    println!("Q_l   {:.4e}     (true {:.4e})", fit.params.q_l, truth.q_l);
    println!("|Q_c| {:.4e}     (true {:.4e})", fit.params.qc_mag, truth.qc_mag);
    println!("phi   {:.4}         (true {:.4})", fit.params.phi, truth.phi);
    println!("Q_i   {:.4e}     (true {q_i:.4e})", fit.q_i().unwrap_or(f64::NAN));
    println!("tau   {:.3e} s   (true {:.3e})", fit.background.cable_delay, bg.cable_delay);
    println!("{} iterations, converged = {}", fit.iterations, fit.converged);
    Ok(())
}
