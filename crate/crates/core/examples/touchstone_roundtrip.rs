//! Writes one trace in all three Touchstone encodings and reads it back.

use resonator_loss::io::{parse_touchstone, write_touchstone, DataFormat};
use resonator_loss::model::{BackgroundModel, ResonanceParams};
use resonator_loss::synth::{synth_trace, FrequencyGrid, NoiseModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let res = ResonanceParams::new(6e9, 4e4, 6e4, -0.3)?;
    let bg = BackgroundModel::new(0.05, -2.0, 35e-9)?;
    let trace = synth_trace(&res, &bg, FrequencyGrid::around(&res, 10.0, 64), NoiseModel::NONE, None, None, "ts")?;

    for fmt in [DataFormat::Ri, DataFormat::Ma, DataFormat::Db] {
        let text = write_touchstone(&trace, fmt);
        let back = parse_touchstone(&text, "ts")?.remove(0);
        let worst = trace
            .transmission()
            .iter()
            .zip(back.transmission())
            .map(|(a, b)| (a - b).norm() / a.norm())
            .fold(0.0, f64::max);
        println!("{fmt:?}: {} bytes, worst relative error {worst:.1e}", text.len());
    }
    print!("{}", write_touchstone(&trace, DataFormat::Ma).lines().take(4).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(())
}
