//! Property tests for model, fit, design and format invariants.

use num_complex::Complex64;
use proptest::prelude::*;

use resonator_loss::constants::{dbm_to_watts, watts_to_dbm};
use resonator_loss::design::{misattribution_error, participation, required_capacitance};
use resonator_loss::fit::{circle_fit, fit_power_sweep, fit_resonance, FitConfig, TlsFit};
use resonator_loss::io::report::FitRecord;
use resonator_loss::io::{
    parse_report, parse_touchstone, write_report, write_touchstone, DataFormat, ReportDocument,
    ReportFormat,
};
use resonator_loss::model::{
    internal_loss, photon_number, resonance_frequency, s21_forward, thermal_factor, tls_loss,
    BackgroundModel, FrequencyTrace, PowerSweepPoint, ResonanceParams, TlsParams,
};
use resonator_loss::synth::{log_grid, synth_power_sweep, synth_trace, FrequencyGrid, NoiseModel};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

prop_compose! {
    fn tls_params()(
        lf in -6.0f64..-4.0,
        lo in -7.0f64..-5.0,
        lnc in -1.0f64..4.0,
        beta in 0.1f64..=2.0,
        f in 4e9f64..8e9,
        t in 0.005f64..1.0,
    ) -> TlsParams {
        TlsParams::new(10f64.powf(lf), 10f64.powf(lo), 10f64.powf(lnc), beta, f, t).unwrap()
    }
}

prop_compose! {
    fn resonator()(
        lqi in 4.0f64..6.0,
        lratio in -0.5f64..0.5,
        phi in -0.6f64..0.6,
        f_r in 4e9f64..8e9,
    ) -> ResonanceParams {
        let q_i = 10f64.powf(lqi);
        let qc = q_i * 10f64.powf(lratio);
        let q_l = 1.0 / (1.0 / q_i + phi.cos() / qc);
        ResonanceParams::new(f_r, q_l, qc, phi).unwrap()
    }
}

prop_compose! {
    fn background()(
        a in 0.2f64..2.0,
        alpha in -3.0f64..3.0,
        tau in -80e-9f64..80e-9,
    ) -> BackgroundModel {
        BackgroundModel::new(a, alpha, tau).unwrap()
    }
}

fn noisy_trace(res: &ResonanceParams, bg: &BackgroundModel, seed: u64) -> FrequencyTrace {
    let grid = FrequencyGrid::around(res, 20.0, 601);
    synth_trace(res, bg, grid, NoiseModel::isotropic(0.02 * res.diameter() * bg.amplitude, seed), None, None, "p")
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tls_loss_monotone_with_limits(p in tls_params(), a in -3.0f64..7.0, b in -3.0f64..7.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(tls_loss(10f64.powf(hi), &p) <= tls_loss(10f64.powf(lo), &p));
        let zero = p.f_delta0 * thermal_factor(p.frequency, p.temperature) + p.delta_other;
        prop_assert!(rel(tls_loss(0.0, &p), zero) < 1e-15);
        prop_assert!(tls_loss(1e300, &p) >= p.delta_other);
        prop_assert!(rel(tls_loss(1e300, &p), p.delta_other) < 1e-6);
    }

    #[test]
    fn thermal_factor_monotone(f1 in 1e9f64..2e10, f2 in 1e9f64..2e10, t1 in 1e-3f64..2.0, t2 in 1e-3f64..2.0) {
        let (fl, fh) = if f1 < f2 { (f1, f2) } else { (f2, f1) };
        let (tl, th) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(thermal_factor(fl, t1) <= thermal_factor(fh, t1));
        prop_assert!(thermal_factor(f1, th) <= thermal_factor(f1, tl));
    }

    #[test]
    fn thermal_factor_is_unity_at_base_temperature(f in 4e9f64..=8e9) {
        prop_assert!((1.0 - thermal_factor(f, 0.01)).abs() < 1e-8);
    }

    #[test]
    fn photon_number_is_linear(p in 1e-20f64..1e-8, f in 4e9f64..8e9, ql in 1e3f64..1e6, qc in 1e3f64..1e7) {
        let n1 = photon_number(p, f, ql, qc);
        prop_assert!(rel(photon_number(2.0 * p, f, ql, qc), 2.0 * n1) < 1e-12);
    }

    #[test]
    fn dbm_round_trip(dbm in -200.0f64..30.0) {
        prop_assert!((watts_to_dbm(dbm_to_watts(dbm)) - dbm).abs() < 1e-12 * dbm.abs().max(1.0));
    }

    #[test]
    fn lineshape_traces_circle_of_expected_diameter(res in resonator()) {
        let lw = res.linewidth();
        let pts: Vec<Complex64> = (0..2001)
            .map(|k| s21_forward(res.f_r + lw * (k as f64 - 1000.0) / 20.0, &res, &BackgroundModel::IDENTITY))
            .collect();
        let c = circle_fit(&pts).unwrap();
        prop_assert!(rel(2.0 * c.radius, res.diameter()) < 1e-6);
    }

    #[test]
    fn internal_loss_scales_inversely(res in resonator(), k in 0.1f64..10.0) {
        let scaled = ResonanceParams::new(res.f_r, k * res.q_l, k * res.qc_mag, res.phi).unwrap();
        let (a, b) = (internal_loss(&res).unwrap(), internal_loss(&scaled).unwrap());
        prop_assert!(rel(b.delta_i, a.delta_i / k) < 1e-12);
    }

    #[test]
    fn capacitance_round_trip(l in 0.1e-9f64..10e-9, c_l in 0.0f64..50e-15, f in 1e9f64..1e10) {
        if let Ok(c_c) = required_capacitance(l, c_l, f) {
            prop_assert!(rel(resonance_frequency(l, c_l, c_c), f) < 1e-12);
            prop_assert!(participation(c_c * 1.01, c_l) >= participation(c_c, c_l));
        }
    }

    #[test]
    fn misattribution_falls_as_participation_rises(p1 in 0.5f64..1.0, p2 in 0.5f64..1.0) {
        let (lo, hi) = if p1 < p2 { (p1, p2) } else { (p2, p1) };
        prop_assume!(lo < hi);
        prop_assert!(misattribution_error(hi, 1e-4, 3.2e-5).relative < misattribution_error(lo, 1e-4, 3.2e-5).relative);
    }

    #[test]
    fn touchstone_encodings_agree(res in resonator(), bg in background(), seed in 0u64..1000) {
        let trace = noisy_trace(&res, &bg, seed);
        let decode = |fmt| parse_touchstone(&write_touchstone(&trace, fmt), "p").unwrap().remove(0);
        let ri = decode(DataFormat::Ri);
        prop_assert_eq!(ri.frequencies(), trace.frequencies());
        for fmt in [DataFormat::Ma, DataFormat::Db] {
            let other = decode(fmt);
            for (a, b) in ri.transmission().iter().zip(other.transmission()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn noiseless_round_trip(res in resonator(), bg in background()) {
        let grid = FrequencyGrid::around(&res, 20.0, 801);
        let trace = synth_trace(&res, &bg, grid, NoiseModel::NONE, None, None, "rt").unwrap();
        let fit = fit_resonance(&trace, &FitConfig::default()).unwrap();
        prop_assert!(rel(fit.params.f_r, res.f_r) < 1e-6);
        prop_assert!(rel(fit.params.q_l, res.q_l) < 1e-6);
        prop_assert!(rel(fit.params.qc_mag, res.qc_mag) < 1e-6);
        prop_assert!((fit.params.phi - res.phi).abs() < 1e-6 * res.phi.abs().max(1.0));
        prop_assert!(rel(fit.background.amplitude, bg.amplitude) < 1e-6);
        prop_assert!((fit.background.cable_delay - bg.cable_delay).abs() < 1e-6 * bg.cable_delay.abs().max(1e-9));
    }

    #[test]
    fn covariance_symmetric_psd(res in resonator(), bg in background(), seed in 0u64..1000) {
        let fit = fit_resonance(&noisy_trace(&res, &bg, seed), &FitConfig::default()).unwrap();
        let c = &fit.covariance;
        let scale = c.abs().max();
        prop_assert!((c - c.transpose()).abs().max() <= 1e-12 * scale);
        let eig = c.clone().symmetric_eigen().eigenvalues;
        prop_assert!(eig.iter().all(|&e| e >= -1e-9 * scale));
    }

    #[test]
    fn delay_shift_moves_only_tau(res in resonator(), bg in background(), seed in 0u64..1000, dtau in -20e-9f64..20e-9) {
        prop_assume!(dtau.abs() > 1e-9);
        let trace = noisy_trace(&res, &bg, seed);
        let shifted = trace.map_transmission(|f, z| z * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f * dtau));
        let cfg = FitConfig::default();
        let (a, b) = (fit_resonance(&trace, &cfg).unwrap(), fit_resonance(&shifted, &cfg).unwrap());
        prop_assert!(((b.background.cable_delay - a.background.cable_delay) - dtau).abs() < 0.01 * dtau.abs());
        prop_assert!((a.params.f_r - b.params.f_r).abs() < 1e-3 * res.linewidth());
        prop_assert!(rel(b.params.q_l, a.params.q_l) < 1e-4);
        prop_assert!(rel(b.params.qc_mag, a.params.qc_mag) < 1e-4);
        prop_assert!((b.params.phi - a.params.phi).abs() < 1e-4);
    }

    #[test]
    fn amplitude_scale_leaves_resonance(res in resonator(), bg in background(), seed in 0u64..1000, k in 0.1f64..10.0) {
        let trace = noisy_trace(&res, &bg, seed);
        let scaled = trace.map_transmission(|_, z| z * k);
        let cfg = FitConfig::default();
        let (a, b) = (fit_resonance(&trace, &cfg).unwrap(), fit_resonance(&scaled, &cfg).unwrap());
        prop_assert!(rel(b.background.amplitude, k * a.background.amplitude) < 1e-6);
        prop_assert!((a.params.f_r - b.params.f_r).abs() < 1e-4 * res.linewidth());
        prop_assert!(rel(b.params.q_l, a.params.q_l) < 1e-6);
        prop_assert!(rel(b.params.qc_mag, a.params.qc_mag) < 1e-6);
        prop_assert!((b.params.phi - a.params.phi).abs() < 1e-6);
    }

    #[test]
    fn sigma_scale_leaves_tls_parameters(seed in 0u64..1000, c in 0.1f64..10.0, n_c in 1.0f64..1e3) {
        let truth = TlsParams::new(2.8e-5, 3.7e-6, n_c, 1.0, 5e9, 0.01).unwrap();
        let sweep = synth_power_sweep(&truth, &log_grid(0.1, 1e6, 10), NoiseModel::relative(0.05, seed)).unwrap();
        let scaled: Vec<PowerSweepPoint> = sweep
            .iter()
            .map(|p| PowerSweepPoint::new(p.photon_number, p.delta_i, c * p.sigma).unwrap())
            .collect();
        let cfg = FitConfig::default();
        let (a, b) = (fit_power_sweep(&sweep, 5e9, 0.01, &cfg).unwrap(), fit_power_sweep(&scaled, 5e9, 0.01, &cfg).unwrap());
        prop_assert!(rel(b.params.f_delta0, a.params.f_delta0) < 1e-6);
        prop_assert!(rel(b.params.delta_other, a.params.delta_other) < 1e-6);
        prop_assert!(rel(b.params.n_c, a.params.n_c) < 1e-5);
        prop_assert!(rel(b.covariance[(0, 0)], c * c * a.covariance[(0, 0)]) < 1e-4);
        check_tls_consistency(&a)?;
    }

    #[test]
    fn report_round_trip_is_byte_stable(res in resonator(), bg in background(), seed in 0u64..1000, n in 1e-2f64..1e7) {
        let fit = fit_resonance(&noisy_trace(&res, &bg, seed), &FitConfig::default()).unwrap();
        let doc = ReportDocument { fits: vec![FitRecord::from_fit(&fit, Some(n))], ..ReportDocument::default() };
        for fmt in [ReportFormat::Json, ReportFormat::Csv] {
            let text = write_report(&doc, fmt);
            let parsed = parse_report(&text, fmt).unwrap();
            prop_assert_eq!(&parsed, &doc);
            prop_assert_eq!(write_report(&parsed, fmt), text);
        }
    }
}

fn check_tls_consistency(fit: &TlsFit) -> Result<(), TestCaseError> {
    prop_assert!(fit.converged);
    prop_assert!(fit.delta_lp >= fit.params.delta_other);
    prop_assert_eq!(fit.q_max, 1.0 / fit.params.delta_other);
    let mut last = f64::INFINITY;
    for n in log_grid(1e-3, 1e9, 5) {
        let d = fit.predict(n);
        prop_assert!(d <= last && d >= fit.params.delta_other);
        last = d;
    }
    Ok(())
}
