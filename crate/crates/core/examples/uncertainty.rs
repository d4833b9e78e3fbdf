//! Compares reported 1σ uncertainties with the scatter over repeated noise draws.

use resonator_loss::fit::{fit_resonance, propagate_uncertainty, FitConfig};
use resonator_loss::model::{BackgroundModel, ResonanceParams};
use resonator_loss::synth::{synth_trace, FrequencyGrid, NoiseModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth = ResonanceParams::new(5e9, 5e4, 8e4, 0.1)?;
    let bg = BackgroundModel::new(0.6, 0.4, 45e-9)?;
    let grid = FrequencyGrid::around(&truth, 20.0, 601);
    let mut q_i = Vec::new();
    let mut reported = Vec::new();
    for seed in 0..100 {
        let noise = NoiseModel::isotropic(0.03 * truth.diameter() * bg.amplitude, seed);
        let fit = fit_resonance(&synth_trace(&truth, &bg, grid.clone(), noise, None, None, "u")?, &FitConfig::default())?;
        let u = propagate_uncertainty(&fit);
        if let Some(s) = u.get("q_i") {
            q_i.push(s.value);
            reported.push(s.sigma);
        }
    }
    let n = q_i.len() as f64;
    let mean = q_i.iter().sum::<f64>() / n;
    let scatter = (q_i.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let typical = reported.iter().sum::<f64>() / n;
    println!("Q_i mean {mean:.4e}, scatter {scatter:.3e}, mean reported σ {typical:.3e}");
    Ok(())
}
