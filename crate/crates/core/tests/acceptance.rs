//! Acceptance gate for the toolkit: one test per numbered criterion, each
//! printing a `criterion NN: PASS — …` line (visible with
//! `cargo test --test acceptance -- --nocapture`). Cargo's own per-test
//! ok/FAILED output doubles as the one-line pass/fail summary.
//!
//! Criterion 09b is expected to fail: the reference device's quoted
//! linewidth split and its quoted on-resonance extinction bound are
//! mutually inconsistent, and this suite checks the model against the
//! numbers as given rather than adjusting either. See the README.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kipa_core::calibration::{
    device_added_noise, field_sweep_reduction, fit_noise_thermometry, fit_reflection,
    CalibrationRecord, Measurement,
};
use kipa_core::circuit::{
    derive_circuit, derive_report, design_bridge_for_kerr, kerr_from_impedance,
    kerr_from_zero_point_current, AlphaSource, DerivedCircuit, DesignConstraints, DeviceSpec,
};
use kipa_core::consts::{db_to_ratio, HBAR, TWO_PI};
use kipa_core::dynamics::{
    dressed_drive, drive_for_target_gain, gain_spectrum, half_power_bandwidth, ideal_added_noise,
    phase_sensitive_gain, retune_for_field_shift, scattering_coefficients,
};
use kipa_core::io::records::{sha256_file, write_record, RecordEnvelope, ToolInfo};
use kipa_core::io::traces::{
    write_field_sweep_csv, write_gain_spectrum_csv, write_noise_trace, write_reflection_csv,
};
use kipa_core::synth;

/// Tones at center ± 2π·133.5 MHz throughout.
const OFFSET: f64 = TWO_PI * 133.5e6;
const OMEGA_S: f64 = TWO_PI * 7.45e9;
const OMEGA_I: f64 = TWO_PI * 7.717e9;

fn device_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/device_nb23.json")
}

fn reference_spec() -> DeviceSpec {
    kipa_core::io::device::read_device_spec(&device_path()).expect("bundled device file")
}

fn reference_circuit() -> DerivedCircuit {
    derive_circuit(&reference_spec()).unwrap()
}

fn lossless_circuit() -> DerivedCircuit {
    let mut spec = reference_spec();
    spec.circuit.intrinsic_loss_rate = 0.0;
    derive_circuit(&spec).unwrap()
}

fn pass(id: &str, start: Instant, budget_s: f64, detail: &str) {
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < budget_s,
        "criterion {id} exceeded its {budget_s} s runtime budget ({elapsed:.2} s)"
    );
    println!("criterion {id}: PASS ({elapsed:.2} s) — {detail}");
}

#[test]
fn criterion_01_kerr_forms_agree() {
    let start = Instant::now();
    // The impedance form and the ħ-normalized zero-point-current form of the
    // Kerr coefficient are the same function of (ω, α, Z, I*): check the
    // identity over randomized valid parameter sets via
    // L_k0 = αZ/ω and I_zpf² = αħω/(2L_k0).
    let mut rng = ChaCha8Rng::seed_from_u64(20260814);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let alpha = rng.gen_range(0.05..0.95);
        let impedance = rng.gen_range(20.0..400.0);
        let i_star = 10f64.powf(rng.gen_range(-6.0..-2.0));
        let omega = TWO_PI * rng.gen_range(1e9..12e9);
        let k_impedance = kerr_from_impedance(omega, alpha, impedance, i_star);
        let l_k0 = alpha * impedance / omega;
        let i_zpf = (alpha * HBAR * omega / (2.0 * l_k0)).sqrt();
        let k_zpf = kerr_from_zero_point_current(l_k0, i_star, i_zpf);
        let rel = ((k_impedance - k_zpf) / k_impedance).abs();
        worst = worst.max(rel);
        assert!(
            rel < 1e-12,
            "Kerr forms disagree by {rel:.3e} at α={alpha:.3}, Z={impedance:.1}, I*={i_star:.2e}, ω={omega:.3e}"
        );
    }
    // The derived reference circuit carries the same cross-check.
    let c = reference_circuit();
    assert!(c.kerr_consistency_error() < 1e-12);
    pass(
        "01",
        start,
        1.0,
        &format!("both Kerr forms agree over 100 random specs (worst rel. {worst:.2e})"),
    );
}

#[test]
fn criterion_02_stated_parameter_kerr_and_flag() {
    let start = Instant::now();
    // Evaluating the Kerr coefficient at the stated characterization point
    // (Z = 88.7 Ω, α = 0.584, I* = 2 µA, 7.45 GHz) gives 2π×4.25 MHz, not
    // the separately quoted 2π×110 kHz; the derive report must say so.
    let k = kerr_from_impedance(OMEGA_S, 0.584, 88.7, 2e-6);
    let k_mhz = k / TWO_PI / 1e6;
    assert!(
        (k_mhz - 4.25).abs() < 0.01,
        "stated-parameter Kerr is 2π×{k_mhz:.4} MHz, expected 2π×(4.25 ± 0.01) MHz"
    );
    let report = derive_report(&reference_spec(), AlphaSource::FromInductances).unwrap();
    assert_eq!(report.kerr_from_stated, Some(k));
    assert!(
        report
            .notes
            .iter()
            .any(|n| n.contains("INCONSISTENT")),
        "derive report does not flag the stated-vs-reported Kerr mismatch: {:?}",
        report.notes
    );
    let factor = report.kerr_mismatch_factor.unwrap();
    assert!((factor - 38.64).abs() < 0.1, "mismatch factor {factor:.2}");
    pass(
        "02",
        start,
        1.0,
        &format!("stated parameters give 2π×{k_mhz:.4} MHz and the report flags the ×{factor:.1} mismatch"),
    );
}

#[test]
fn criterion_03_quantum_limit() {
    let start = Instant::now();
    let lossless = lossless_circuit();
    let op = drive_for_target_gain(&lossless, OFFSET, 26.0, 0.0, 0.0).unwrap();
    let noise = ideal_added_noise(&lossless, &op.pump, 0.0).unwrap();
    // Added noise equals the loss-free bound (1 − 1/G)/2 at the achieved gain.
    assert!(
        (noise.added_quanta - noise.quantum_limit_quanta).abs() < 1e-6,
        "lossless added noise {:.9} vs bound {:.9}",
        noise.added_quanta,
        noise.quantum_limit_quanta
    );
    assert!((noise.added_quanta - 0.498744056784).abs() < 2e-5);
    // Internal loss pushes the added noise strictly above the bound.
    let lossy = reference_circuit();
    let op = drive_for_target_gain(&lossy, OFFSET, 26.0, 0.0, 0.0).unwrap();
    let noise_lossy = ideal_added_noise(&lossy, &op.pump, 0.0).unwrap();
    assert!(
        noise_lossy.added_quanta > noise_lossy.quantum_limit_quanta + 0.01,
        "lossy added noise {:.4} does not exceed the bound {:.4}",
        noise_lossy.added_quanta,
        noise_lossy.quantum_limit_quanta
    );
    pass(
        "03",
        start,
        1.0,
        &format!(
            "lossless {:.6} quanta at the (1−1/G)/2 bound; internal loss raises it to {:.4}",
            noise.added_quanta, noise_lossy.added_quanta
        ),
    );
}

#[test]
fn criterion_04_unitarity() {
    let start = Instant::now();
    let c = lossless_circuit();
    let op = drive_for_target_gain(&c, OFFSET, 26.0, 0.0, 0.0).unwrap();
    let kappa = c.total_decay_rate();
    let n = 2001;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let delta = -kappa + 2.0 * kappa * i as f64 / (n - 1) as f64;
        let sc = scattering_coefficients(&c, &op.pump, delta).unwrap();
        let dev = (sc.signal.norm_sqr() - sc.idler.norm_sqr() - 1.0).abs();
        worst = worst.max(dev);
    }
    assert!(
        worst < 1e-9,
        "lossless |g_s|² − |g_i|² deviates from 1 by {worst:.3e}"
    );
    pass(
        "04",
        start,
        1.0,
        &format!("|g_s|² − |g_i|² = 1 at {n} points (max deviation {worst:.2e})"),
    );
}

#[test]
fn criterion_05_gain_bandwidth_product() {
    let start = Instant::now();
    let c = reference_circuit();
    let kappa_mhz = c.total_decay_rate() / TWO_PI / 1e6; // 58.9 MHz
    assert!((kappa_mhz - 58.9).abs() < 1e-9);
    let mut lines = Vec::new();
    for (gain_db, tolerance) in [(24.0, 0.15), (30.0, 0.05), (35.0, 0.05), (40.0, 0.05)] {
        let op = drive_for_target_gain(&c, OFFSET, gain_db, 0.0, 0.0).unwrap();
        let bw_mhz = half_power_bandwidth(&c, &op.pump).unwrap() / TWO_PI / 1e6;
        let gbw = db_to_ratio(op.gain_db).sqrt() * bw_mhz;
        assert!(
            ((gbw - kappa_mhz) / kappa_mhz).abs() < tolerance,
            "√G·BW = {gbw:.3} MHz at {gain_db} dB is outside {:.0}% of κ_tot = {kappa_mhz} MHz",
            100.0 * tolerance
        );
        lines.push(format!("{gain_db:.0} dB → {bw_mhz:.4} MHz (√G·BW {gbw:.2})"));
    }
    // Reference line, recorded but not asserted: a measured device of this
    // class shows ~3.1 MHz at 24 dB against the model's 3.50 MHz.
    println!(
        "criterion 05 note: model 24 dB bandwidth 3.4988 MHz; measured comparison value 3.1 MHz"
    );
    pass("05", start, 10.0, &lines.join(", "));
}

#[test]
fn criterion_06_phase_sensitive_periodicity() {
    let start = Instant::now();
    let c = lossless_circuit();
    let op = drive_for_target_gain(&c, OFFSET, 20.0, 0.3, -0.4).unwrap();

    // Period π in the probe phase.
    let n = 721;
    let phases: Vec<f64> = (0..n).map(|i| TWO_PI * i as f64 / (n - 1) as f64).collect();
    let sweep = phase_sensitive_gain(&c, &op.pump, &phases).unwrap();
    let half = (n - 1) / 2;
    let mut worst: f64 = 0.0;
    for i in 0..=half {
        worst = worst.max((sweep.gain_db[i] - sweep.gain_db[i + half]).abs());
    }
    assert!(worst < 1e-9, "π-periodicity broken by {worst:.3e} dB");

    // Period 2π in one pump phase alone, at the identical drive power.
    let op_shifted = dressed_drive(&c, OFFSET, op.drive.pump1_power, 0.3 + TWO_PI, -0.4).unwrap();
    let sweep_shifted = phase_sensitive_gain(&c, &op_shifted.pump, &phases).unwrap();
    let mut worst_pump: f64 = 0.0;
    for (a, b) in sweep.gain_db.iter().zip(&sweep_shifted.gain_db) {
        worst_pump = worst_pump.max((a - b).abs());
    }
    assert!(
        worst_pump < 1e-9,
        "2π pump-phase periodicity broken by {worst_pump:.3e} dB"
    );

    // Lossless G_max·G_min = 1, sampling the exact quadrature extrema.
    let sc = scattering_coefficients(&c, &op.pump, 0.0).unwrap();
    let axis = 0.5 * (sc.idler.arg() - sc.signal.arg());
    let aligned: Vec<f64> = (0..4)
        .map(|i| axis + 0.25 * std::f64::consts::PI * i as f64)
        .collect();
    let extrema = phase_sensitive_gain(&c, &op.pump, &aligned).unwrap();
    let product = db_to_ratio(extrema.max_gain_db) * db_to_ratio(extrema.min_gain_db);
    assert!(
        (product - 1.0).abs() < 1e-9,
        "lossless G_max·G_min = {product:.12}, not 1"
    );
    pass(
        "06",
        start,
        5.0,
        &format!(
            "π-periodic in probe phase ({worst:.1e} dB), 2π in a pump phase ({worst_pump:.1e} dB), G_max·G_min − 1 = {:.1e}",
            product - 1.0
        ),
    );
}

fn thermometry_roundtrip(truth_noise: f64, seed: u64) -> (f64, f64) {
    let truth = synth::NoiseSweepTruth {
        system_gain: db_to_ratio(26.0),
        system_noise: truth_noise,
        detection_bandwidth: 1e6,
        signal_frequency: OMEGA_S,
        idler_frequency: OMEGA_I,
    };
    let temperatures: Vec<f64> = (0..12).map(|i| 0.058 + 0.05 * i as f64).collect();
    let trace = synth::noise_sweep(&truth, &temperatures, 0.01, seed).unwrap();
    let fit = fit_noise_thermometry(&trace).unwrap();
    (fit.system_noise.value, fit.vts_output_intercept.value)
}

#[test]
fn criterion_07_noise_thermometry_round_trip() {
    let start = Instant::now();
    // 12 temperatures from 58 to 608 mK, 1% multiplicative noise, fixed seed.
    let (n_059, intercept) = thermometry_roundtrip(0.59, 42);
    assert!(
        (n_059 - 0.59).abs() < 0.03,
        "recovered added noise {n_059:.4} vs truth 0.59 (±0.03)"
    );
    assert!(
        (intercept - 1.09).abs() < 0.03,
        "T→0 output intercept {intercept:.4} vs 1.09 (±0.03)"
    );
    let (n_064, _) = thermometry_roundtrip(0.64, 43);
    assert!(
        (n_064 - 0.64).abs() < 0.03,
        "recovered added noise {n_064:.4} vs truth 0.64 (±0.03)"
    );
    pass(
        "07",
        start,
        5.0,
        &format!(
            "recovered {n_059:.4} for truth 0.59 (intercept {intercept:.4}) and {n_064:.4} for truth 0.64"
        ),
    );
}

#[test]
fn criterion_08_device_noise_backout() {
    let start = Instant::now();
    let gain = Measurement::new(db_to_ratio(26.0), 0.0);
    let backout = |lambda: f64, chain: f64| {
        device_added_noise(
            Measurement::new(0.59, 0.0),
            Measurement::new(lambda, 0.0),
            Measurement::new(chain, 0.0),
            gain,
        )
        .unwrap()
        .value
    };
    let center = backout(0.95, 23.0);
    assert!(
        (center - 0.478).abs() < 0.002,
        "device noise {center:.6} vs 0.478 ± 0.002"
    );
    // The transmission/chain-noise uncertainty box maps to ≈ [0.44, 0.52],
    // bracketing 0.50. The map is monotone in both inputs, so the extreme
    // corners bound the whole box.
    let lo = backout(0.92, 25.0);
    let hi = backout(0.98, 21.0);
    assert!((lo - 0.44).abs() < 0.01, "low corner {lo:.5}");
    assert!((hi - 0.52).abs() < 0.01, "high corner {hi:.5}");
    assert!(lo < 0.50 && 0.50 < hi, "span [{lo:.4}, {hi:.4}] misses 0.50");
    pass(
        "08",
        start,
        1.0,
        &format!("back-out {center:.6} quanta; uncertainty box spans [{lo:.4}, {hi:.4}]"),
    );
}

fn reflection_truth() -> synth::ReflectionTruth {
    // κ_tot = 2π×58.9 MHz split by Q_int = ω₀/κ_int = 4000.
    let kappa_tot = TWO_PI * 58.9e6;
    let kappa_int = OMEGA_S / 4000.0;
    synth::ReflectionTruth {
        resonant_frequency: OMEGA_S,
        external_coupling_rate: kappa_tot - kappa_int,
        intrinsic_loss_rate: kappa_int,
    }
}

#[test]
fn criterion_09a_reflection_fit_round_trip() {
    let start = Instant::now();
    let truth = reflection_truth();
    let trace = synth::reflection_trace(&truth, 8001, 3.0, 0.01, 12345).unwrap();
    let fit = fit_reflection(&trace).unwrap();
    let w0_ppm =
        (fit.resonant_frequency.value - truth.resonant_frequency).abs() / truth.resonant_frequency
            * 1e6;
    let kext_rel = (fit.external_coupling_rate.value - truth.external_coupling_rate).abs()
        / truth.external_coupling_rate;
    let kint_rel =
        (fit.intrinsic_loss_rate.value - truth.intrinsic_loss_rate).abs() / truth.intrinsic_loss_rate;
    assert!(w0_ppm < 1.0, "ω₀ recovered {w0_ppm:.3} ppm off (> 1 ppm)");
    assert!(kext_rel < 0.01, "κ_ext off by {:.3}%", 100.0 * kext_rel);
    assert!(kint_rel < 0.01, "κ_int off by {:.3}%", 100.0 * kint_rel);
    pass(
        "09a",
        start,
        5.0,
        &format!(
            "1% noise round trip: ω₀ {w0_ppm:.3} ppm, κ_ext {:.3}%, κ_int {:.3}%",
            100.0 * kext_rel,
            100.0 * kint_rel
        ),
    );
}

#[test]
fn criterion_09b_on_resonance_extinction() {
    let start = Instant::now();
    let truth = reflection_truth();
    let extinction_db = -20.0 * truth.reflection(truth.resonant_frequency).norm().log10();
    // This bound cannot hold together with the stated linewidth split:
    // |S11(ω₀)| = (κ_ext − κ_int)/κ_tot = 55.175/58.9 = 0.93676 → 0.5675 dB.
    // The model is kept faithful to the linewidths, so this check fails and
    // documents the inconsistency between the two quoted characterization
    // numbers rather than glossing over it.
    assert!(
        extinction_db < 0.5,
        "on-resonance extinction of the noiseless model is {extinction_db:.4} dB, not < 0.5 dB: \
         with κ_ext = 57.0375 MHz and κ_int = 1.8625 MHz (Q_int = 4000), \
         |S11(ω₀)| = (κ_ext − κ_int)/κ_tot = 0.93676 → 0.5675 dB. The quoted linewidth \
         split and the quoted extinction bound are mutually inconsistent; the model \
         follows the linewidths."
    );
    pass("09b", start, 1.0, &format!("extinction {extinction_db:.4} dB"));
}

#[test]
fn criterion_10_field_sweep_and_retune() {
    let start = Instant::now();
    // Calibrate the chain on a synthetic thermometry sweep, then reduce a
    // synthetic field sweep with that calibration.
    let gain_truth = db_to_ratio(26.0);
    let noise_truth = synth::NoiseSweepTruth {
        system_gain: gain_truth,
        system_noise: 0.59,
        detection_bandwidth: 1e6,
        signal_frequency: OMEGA_S,
        idler_frequency: OMEGA_I,
    };
    let temperatures: Vec<f64> = (0..12).map(|i| 0.058 + 0.05 * i as f64).collect();
    let cal_trace = synth::noise_sweep(&noise_truth, &temperatures, 0.01, 42).unwrap();
    let record = CalibrationRecord {
        noise: Some(fit_noise_thermometry(&cal_trace).unwrap()),
        ..CalibrationRecord::default()
    };

    let field_truth = synth::FieldSweepTruth {
        system_gain: gain_truth,
        base_temperature: 0.058,
        signal_frequency: OMEGA_S,
        idler_frequency: OMEGA_I,
        zero_field_noise: 0.59,
        max_field_noise: 0.68,
        max_field: 0.427,
    };
    let fields: Vec<f64> = (0..25).map(|i| 0.427 * i as f64 / 24.0).collect();
    let sweep = synth::field_sweep(&field_truth, &fields, 0.01, 7).unwrap();
    let reduction = field_sweep_reduction(&sweep, &record, 0.058, OMEGA_S, OMEGA_I).unwrap();
    let mut worst: f64 = 0.0;
    for (b, m) in reduction.fields.iter().zip(&reduction.added_noise) {
        let err = (m.value - field_truth.added_noise(*b)).abs();
        worst = worst.max(err);
        assert!(
            err < 0.07,
            "added noise at {b:.3} T recovered {:.4} vs truth {:.4} (> ±0.07)",
            m.value,
            field_truth.added_noise(*b)
        );
    }

    // A −26 MHz resonance shift is compensated back to the original gain.
    let c = reference_circuit();
    let op = drive_for_target_gain(&c, OFFSET, 26.0, 0.0, 0.0).unwrap();
    let retuned = retune_for_field_shift(&c, &op, -TWO_PI * 26e6).unwrap();
    assert!(
        (retuned.operating_point.gain_db - 26.0).abs() < 0.1,
        "retuned gain {:.4} dB not within 0.1 dB of 26 dB",
        retuned.operating_point.gain_db
    );
    pass(
        "10",
        start,
        10.0,
        &format!(
            "25-point sweep recovered within ±0.07 (worst {worst:.4}); retune restores {:.4} dB with {:+.4} dB power trim",
            retuned.operating_point.gain_db, retuned.power_adjustment_db
        ),
    );
}

#[test]
fn criterion_11_design_inversion_and_range() {
    let start = Instant::now();
    let spec = reference_spec();
    let c = derive_circuit(&spec).unwrap();
    let constraints = DesignConstraints {
        shunt_capacitance: spec.circuit.shunt_capacitance,
        parasitic_inductance: spec.circuit.parasitic_inductance,
        min_width: 12e-9,
        max_width: 2e-6,
    };
    let geometry =
        design_bridge_for_kerr(&spec.film, &constraints, c.kerr_coefficient, c.resonant_frequency)
            .unwrap();
    let width_rel = ((geometry.width - spec.geometry.width) / spec.geometry.width).abs();
    let length_rel = ((geometry.length - spec.geometry.length) / spec.geometry.length).abs();
    assert!(
        width_rel < 1e-6 && length_rel < 1e-6,
        "design inversion drifted: width {:.4e} m, length {:.4e} m",
        geometry.width,
        geometry.length
    );

    // K ∝ 1/I*²: the characteristic-current range 2 µA → 10 mA spans
    // (5000)² ≈ 7.4 orders of magnitude in K, comfortably ≥ 6.5.
    let k_lo = kerr_from_impedance(c.resonant_frequency, c.participation_ratio, c.impedance, 10e-3);
    let k_hi = kerr_from_impedance(c.resonant_frequency, c.participation_ratio, c.impedance, 2e-6);
    let span_orders = (k_hi / k_lo).log10();
    assert!(
        span_orders >= 6.5,
        "I* sweep spans only {span_orders:.2} orders of magnitude in K"
    );
    pass(
        "11",
        start,
        5.0,
        &format!(
            "geometry round trip within {:.1e}; K spans {span_orders:.2} orders over I* ∈ [2 µA, 10 mA]",
            width_rel.max(length_rel)
        ),
    );
}

/// Write every kind of result file the toolkit produces, with fixed seeds,
/// and return (name, digest) pairs.
fn result_files(dir: &Path) -> Vec<(String, String)> {
    let tool = ToolInfo {
        name: "kipa-acceptance".into(),
        version: "1".into(),
    };

    let trace = synth::reflection_trace(&reflection_truth(), 801, 3.0, 0.01, 12345).unwrap();
    write_reflection_csv(&dir.join("reflection.csv"), &trace).unwrap();
    let fit = fit_reflection(&trace).unwrap();
    let record = CalibrationRecord {
        reflection: Some(fit),
        ..CalibrationRecord::default()
    };
    write_record(
        &dir.join("calibration.json"),
        &RecordEnvelope::new(tool.clone(), "calibration", serde_json::to_value(&record).unwrap()),
    )
    .unwrap();

    let noise_truth = synth::NoiseSweepTruth {
        system_gain: db_to_ratio(26.0),
        system_noise: 0.59,
        detection_bandwidth: 1e6,
        signal_frequency: OMEGA_S,
        idler_frequency: OMEGA_I,
    };
    let temperatures: Vec<f64> = (0..12).map(|i| 0.058 + 0.05 * i as f64).collect();
    let noise = synth::noise_sweep(&noise_truth, &temperatures, 0.01, 42).unwrap();
    write_noise_trace(&dir.join("noise.csv"), &dir.join("noise_meta.json"), &noise).unwrap();

    let field_truth = synth::FieldSweepTruth {
        system_gain: db_to_ratio(26.0),
        base_temperature: 0.058,
        signal_frequency: OMEGA_S,
        idler_frequency: OMEGA_I,
        zero_field_noise: 0.59,
        max_field_noise: 0.68,
        max_field: 0.427,
    };
    let fields: Vec<f64> = (0..25).map(|i| 0.427 * i as f64 / 24.0).collect();
    let sweep = synth::field_sweep(&field_truth, &fields, 0.01, 7).unwrap();
    write_field_sweep_csv(&dir.join("field_sweep.csv"), &sweep).unwrap();

    let c = reference_circuit();
    let op = drive_for_target_gain(&c, OFFSET, 26.0, 0.0, 0.0).unwrap();
    let spectrum = gain_spectrum(&c, &op.pump, &[]).unwrap();
    write_gain_spectrum_csv(&dir.join("gain.csv"), &spectrum).unwrap();
    write_record(
        &dir.join("gain.json"),
        &RecordEnvelope::new(
            tool,
            "gain-spectrum",
            serde_json::json!({
                "drive": serde_json::to_value(op.drive).unwrap(),
                "gain_db": op.gain_db,
            }),
        ),
    )
    .unwrap();

    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|n| {
            let digest = sha256_file(&dir.join(&n)).unwrap();
            (n, digest)
        })
        .collect()
}

#[test]
fn criterion_12_deterministic_result_files() {
    let start = Instant::now();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let run_a = result_files(dir_a.path());
    let run_b = result_files(dir_b.path());
    assert_eq!(run_a.len(), 7);
    assert_eq!(
        run_a, run_b,
        "result files differ between two identically seeded runs"
    );
    pass(
        "12",
        start,
        30.0,
        &format!("{} result files byte-identical across independent runs", run_a.len()),
    );
}
