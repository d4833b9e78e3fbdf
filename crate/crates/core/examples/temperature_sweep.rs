//! Shows the thermal saturation of TLS loss with temperature at fixed power.

use resonator_loss::model::{thermal_factor, TlsParams};
use resonator_loss::synth::synth_temperature_sweep;
use resonator_loss::synth::NoiseModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = TlsParams::new(2.8e-5, 3.7e-6, 30.0, 1.0, 5e9, 0.01)?;
    let temps: Vec<f64> = (1..=12).map(|k| 0.05 * k as f64).collect();
    for (t, delta) in synth_temperature_sweep(&p, &temps, 1.0, NoiseModel::NONE)? {
        println!("{:.2} K  tanh {:.4}  δ_i {:.3e}  Q_i {:.3e}", t, thermal_factor(p.frequency, t), delta, 1.0 / delta);
    }
    Ok(())
}
