//! Fits the TLS saturation law to a seeded power sweep, with β fixed and free.

use resonator_loss::fit::{fit_power_sweep, BetaMode, FitConfig};
use resonator_loss::model::TlsParams;
use resonator_loss::synth::{log_grid, synth_power_sweep, NoiseModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth = TlsParams::new(2.8e-5, 3.7e-6, 25.0, 1.0, 5e9, 0.01)?;
    let sweep = synth_power_sweep(&truth, &log_grid(0.05, 1e6, 8), NoiseModel::relative(0.03, 11))?;

    for mode in [BetaMode::Fixed(1.0), BetaMode::Free] {
        let cfg = FitConfig {
            beta_mode: mode,
            ..FitConfig::default()
        };
        let fit = fit_power_sweep(&sweep, truth.frequency, truth.temperature, &cfg)?;
        let sd: Vec<f64> = (0..fit.covariance.nrows()).map(|i| fit.covariance[(i, i)].sqrt()).collect();
        println!("beta {mode:?}");
        println!("  F·δ⁰     {:.3e} ± {:.1e}", fit.params.f_delta0, sd[0]);
        println!("  δ_other  {:.3e} ± {:.1e}", fit.params.delta_other, sd[1]);
        println!("  n_c      {:.1} ± {:.1}", fit.params.n_c, sd[2]);
        println!("  β        {:.3}", fit.params.beta);
        println!("  δ_LP {:.3e}  Q_max {:.3e}", fit.delta_lp, fit.q_max);
    }
    Ok(())
}
