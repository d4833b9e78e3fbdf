//! Inverse design of lumped-element resonators with a parallel-plate capacitor.
//!
//! The inductance L and the parasitic shunt capacitance C_L come from an
//! external electromagnetic simulation; everything here is closed-form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::VACUUM_PERMITTIVITY;
use crate::model::resonance_frequency;

/// Placeholder relative permittivity for epitaxial alumina. Not a measured
/// value; supply the real one when known.
pub const DEFAULT_EPS_R: f64 = 9.8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("target {f_target:e} Hz unreachable: shunt capacitance already exceeds the {total:e} F total")]
    Unreachable { f_target: f64, total: f64 },
    #[error("no frequency in the band gives a feasible design")]
    EmptyBand,
    #[error("invalid design input: {0}")]
    InvalidInput(String),
    #[error("design record violates its invariants: {0}")]
    Inconsistent(String),
}

/// C_C = 1/(L (2π f)²) − C_L
pub fn required_capacitance(inductance: f64, shunt_capacitance: f64, f_target: f64) -> Result<f64, DesignError> {
    if !(inductance > 0.0 && shunt_capacitance >= 0.0 && f_target > 0.0) {
        return Err(DesignError::InvalidInput(
            "need L > 0, C_L >= 0 and f_target > 0".into(),
        ));
    }
    let omega = 2.0 * PI * f_target;
    let total = 1.0 / (inductance * omega * omega);
    let c_c = total - shunt_capacitance;
    if c_c <= 0.0 {
        return Err(DesignError::Unreachable { f_target, total });
    }
    Ok(c_c)
}

/// Plate area, m², and radius of the equivalent circular plate, m.
pub fn ppc_geometry(capacitance: f64, thickness: f64, eps_r: f64) -> (f64, f64) {
    let area = capacitance * thickness / (VACUUM_PERMITTIVITY * eps_r);
    (area, (area / PI).sqrt())
}

/// Fraction of capacitive energy in the parallel-plate capacitor.
pub fn participation(coupling_capacitance: f64, shunt_capacitance: f64) -> f64 {
    coupling_capacitance / (coupling_capacitance + shunt_capacitance)
}

/// Loss wrongly attributed to the dielectric by the shunt path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Misattribution {
    /// (1 − p)·F_L tanδ_L
    pub additive: f64,
    /// `additive` as a fraction of the measured loss.
    pub relative: f64,
}

pub fn misattribution_error(participation: f64, inductor_loss_bound: f64, delta_measured: f64) -> Misattribution {
    let additive = (1.0 - participation) * inductor_loss_bound;
    Misattribution {
        additive,
        relative: additive / delta_measured,
    }
}

/// Smallest participation ratio keeping the relative misattribution at or
/// below `ceiling`. Zero when any p satisfies it.
pub fn participation_for_ceiling(inductor_loss_bound: f64, delta_measured: f64, ceiling: f64) -> f64 {
    if inductor_loss_bound <= 0.0 {
        return 0.0;
    }
    (1.0 - ceiling * delta_measured / inductor_loss_bound).max(0.0)
}

/// One candidate resonator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LumpedDesign {
    /// H
    pub inductance: f64,
    /// F
    pub shunt_capacitance: f64,
    /// F
    pub coupling_capacitance: f64,
    /// Dielectric thickness, m.
    pub thickness: f64,
    pub eps_r: f64,
    /// m²
    pub area: f64,
    /// m
    pub disc_radius: f64,
    pub participation: f64,
    /// Hz
    pub f_r: f64,
    /// F_L tanδ_L
    pub inductor_loss_bound: f64,
    pub misattribution: Misattribution,
}

impl LumpedDesign {
    /// Re-derives the dependent fields and checks them against the stored ones.
    pub fn check(&self) -> Result<(), DesignError> {
        let bad = |m: String| Err(DesignError::Inconsistent(m));
        if !(self.participation > 0.0 && self.participation < 1.0 || self.shunt_capacitance == 0.0) {
            return bad(format!("participation {} outside (0, 1)", self.participation));
        }
        let f = resonance_frequency(self.inductance, self.shunt_capacitance, self.coupling_capacitance);
        if (f - self.f_r).abs() > 1e-12 * self.f_r {
            return bad(format!("f_r {} disagrees with the LC value {f}", self.f_r));
        }
        let (area, _) = ppc_geometry(self.coupling_capacitance, self.thickness, self.eps_r);
        if (area - self.area).abs() > 1e-12 * self.area {
            return bad(format!("area {} disagrees with {area}", self.area));
        }
        let p = participation(self.coupling_capacitance, self.shunt_capacitance);
        if (p - self.participation).abs() > 1e-15 {
            return bad(format!("participation {} disagrees with {p}", self.participation));
        }
        Ok(())
    }
}

/// Inputs to [`design_report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub inductance: f64,
    pub shunt_capacitance: f64,
    pub thickness: f64,
    pub eps_r: f64,
    /// (low, high), Hz.
    pub band: (f64, f64),
    pub p_min: f64,
    pub inductor_loss_bound: f64,
    /// Loss the dielectric is expected to show, used for the relative error.
    pub delta_expected: f64,
    /// Largest acceptable relative misattribution.
    pub max_misattribution: f64,
    /// Evenly spaced target frequencies across the band, endpoints included.
    pub grid_points: usize,
}

impl DesignSpec {
    pub fn new(inductance: f64, shunt_capacitance: f64, thickness: f64, band: (f64, f64)) -> Self {
        Self {
            inductance,
            shunt_capacitance,
            thickness,
            eps_r: DEFAULT_EPS_R,
            band,
            p_min: 0.99,
            inductor_loss_bound: 1e-4,
            delta_expected: 3.2e-5,
            max_misattribution: 0.02,
            grid_points: 9,
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        let (lo, hi) = self.band;
        if lo == hi || self.grid_points <= 1 {
            return vec![lo];
        }
        let n = self.grid_points;
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// Verdict for one grid frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignEntry {
    pub f_target: f64,
    /// `None` when the target is unreachable.
    pub design: Option<LumpedDesign>,
    pub feasible: bool,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub spec: DesignSpec,
    pub entries: Vec<DesignEntry>,
    /// Participation needed to meet `max_misattribution`.
    pub p_required: f64,
}

impl DesignReport {
    pub fn feasible(&self) -> impl Iterator<Item = &DesignEntry> {
        self.entries.iter().filter(|e| e.feasible)
    }
}

/// Builds a design at a single target frequency.
pub fn design_at(spec: &DesignSpec, f_target: f64) -> Result<LumpedDesign, DesignError> {
    let c_c = required_capacitance(spec.inductance, spec.shunt_capacitance, f_target)?;
    let (area, disc_radius) = ppc_geometry(c_c, spec.thickness, spec.eps_r);
    let p = participation(c_c, spec.shunt_capacitance);
    let design = LumpedDesign {
        inductance: spec.inductance,
        shunt_capacitance: spec.shunt_capacitance,
        coupling_capacitance: c_c,
        thickness: spec.thickness,
        eps_r: spec.eps_r,
        area,
        disc_radius,
        participation: p,
        f_r: resonance_frequency(spec.inductance, spec.shunt_capacitance, c_c),
        inductor_loss_bound: spec.inductor_loss_bound,
        misattribution: misattribution_error(p, spec.inductor_loss_bound, spec.delta_expected),
    };
    design.check()?;
    Ok(design)
}

/// Sweeps the band and classifies each grid frequency.
///
/// A design is feasible when C_C is reachable, p ≥ `p_min`, and the relative
/// misattribution stays within `max_misattribution`.
pub fn design_report(spec: &DesignSpec) -> Result<DesignReport, DesignError> {
    let (lo, hi) = spec.band;
    if !(lo > 0.0 && lo <= hi) {
        return Err(DesignError::InvalidInput(format!("band [{lo}, {hi}] is not ordered")));
    }
    if !(spec.p_min > 0.0 && spec.p_min < 1.0) {
        return Err(DesignError::InvalidInput("p_min must lie in (0, 1)".into()));
    }
    if !(spec.thickness > 0.0 && spec.eps_r > 0.0 && spec.delta_expected > 0.0 && spec.inductor_loss_bound >= 0.0) {
        return Err(DesignError::InvalidInput(
            "thickness, eps_r and delta_expected must be positive".into(),
        ));
    }
    let entries: Vec<DesignEntry> = spec
        .grid()
        .into_iter()
        .map(|f| match design_at(spec, f) {
            Ok(d) => {
                let mut reasons = Vec::new();
                if d.participation < spec.p_min {
                    reasons.push(format!("participation {:.5} below {}", d.participation, spec.p_min));
                }
                if d.misattribution.relative > spec.max_misattribution {
                    reasons.push(format!(
                        "misattribution {:.2}% above {:.2}%",
                        100.0 * d.misattribution.relative,
                        100.0 * spec.max_misattribution
                    ));
                }
                DesignEntry {
                    f_target: f,
                    feasible: reasons.is_empty(),
                    design: Some(d),
                    reasons,
                }
            }
            Err(e) => DesignEntry {
                f_target: f,
                design: None,
                feasible: false,
                reasons: vec![e.to_string()],
            },
        })
        .collect();
    if !entries.iter().any(|e| e.feasible) {
        return Err(DesignError::EmptyBand);
    }
    Ok(DesignReport {
        p_required: participation_for_ceiling(spec.inductor_loss_bound, spec.delta_expected, spec.max_misattribution),
        spec: spec.clone(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacitance_for_five_gigahertz() {
        let c = required_capacitance(1e-9, 10e-15, 5e9).unwrap();
        assert!((c - 1.0032e-12).abs() < 0.0001e-12, "{c}");
        let c0 = required_capacitance(1e-9, 0.0, 5e9).unwrap();
        assert!((resonance_frequency(1e-9, 0.0, c0) - 5e9).abs() <= 1e-12 * 5e9);
        assert!(matches!(
            required_capacitance(1e-9, 2e-12, 5e9),
            Err(DesignError::Unreachable { .. })
        ));
    }

    #[test]
    fn plate_geometry() {
        let (a, r) = ppc_geometry(1.0132e-12, 58.3e-9, 9.8);
        assert!((a * 1e12 - 680.8).abs() < 0.5, "{}", a * 1e12);
        assert!((r * 1e6 - 14.72).abs() < 0.01);
        let (a2, _) = ppc_geometry(1.0132e-12, 58.3e-9 / 2.0, 9.8);
        assert!((a2 - a / 2.0).abs() <= 1e-15 * a);
        let (a_thin, _) = ppc_geometry(1.0132e-12, 13.5e-9, 9.8);
        assert!((a_thin * 1e12 - 157.7).abs() < 0.2, "{}", a_thin * 1e12);
    }

    #[test]
    fn participation_values() {
        assert_eq!(participation(1e-12, 0.0), 1.0);
        assert_eq!(participation(3e-13, 3e-13), 0.5);
        let p = participation(1.0032e-12, 10e-15);
        assert!((p - 0.9901).abs() < 5e-5);
        assert!(p > 0.99);
    }

    #[test]
    fn misattribution_values() {
        let m = misattribution_error(0.995, 1e-4, 3.2e-5);
        assert!((m.additive - 5e-7).abs() < 1e-18);
        assert!((m.relative - 0.015625).abs() < 1e-12);
        let m = misattribution_error(0.99, 1e-4, 3.2e-5);
        assert!((m.relative - 0.03125).abs() < 1e-12);
        let m = misattribution_error(0.99, 0.0, 3.2e-5);
        assert_eq!((m.additive, m.relative), (0.0, 0.0));
        assert!((participation_for_ceiling(1e-4, 3.2e-5, 0.02) - 0.9936).abs() < 1e-12);
    }

    #[test]
    fn single_frequency_band() {
        let spec = DesignSpec {
            band: (4e9, 4e9),
            ..DesignSpec::new(1e-9, 10e-15, 58.3e-9, (4e9, 4e9))
        };
        let r = design_report(&spec).unwrap();
        assert_eq!(r.entries.len(), 1);
    }

    #[test]
    fn large_shunt_is_infeasible_everywhere() {
        let spec = DesignSpec::new(1e-9, 1e-12, 58.3e-9, (4e9, 8e9));
        assert_eq!(design_report(&spec), Err(DesignError::EmptyBand));
    }
}
