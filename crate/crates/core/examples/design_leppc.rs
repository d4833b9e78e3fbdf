//! Sizes a parallel-plate coupling capacitor across a band and reports
//! where inductor loss would bias the dielectric loss estimate.

use resonator_loss::design::{design_report, DesignSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut spec = DesignSpec::new(1e-9, 10e-15, 58.3e-9, (4e9, 8e9));
    spec.grid_points = 5;
    let report = design_report(&spec)?;
    println!("participation needed for ≤{:.0}% misattribution: {:.4}", 100.0 * spec.max_misattribution, report.p_required);
    for e in &report.entries {
        match &e.design {
            Some(d) => println!(
                "{:.2} GHz  C_C {:.3} pF  disc r {:.1} µm  p {:.4}  error {:.2}%  {}",
                e.f_target / 1e9,
                d.coupling_capacitance * 1e12,
                d.disc_radius * 1e6,
                d.participation,
                100.0 * d.misattribution.relative,
                if e.feasible { "ok".to_string() } else { e.reasons.join("; ") }
            ),
            None => println!("{:.2} GHz  unreachable: {}", e.f_target / 1e9, e.reasons.join("; ")),
        }
    }
    Ok(())
}
