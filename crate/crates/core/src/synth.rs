//! Deterministic synthetic measurement data.
//!
//! Each generator takes a ground-truth parameter set, a noise level, and a
//! seed, and produces data through the same models the calibration fits
//! invert. The RNG is a fixed-algorithm keyed stream cipher
//! ([`ChaCha8Rng`]), so a given (truth, grid, level, seed) tuple yields
//! byte-identical data on every platform.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::calibration::{
    bose_einstein_occupancy, noise_psd_model, FieldPoint, NoiseTrace, ReflectionTrace,
};
use crate::error::{Error, Result};

type C64 = Complex<f64>;

// ---------------------------------------------------------------------------
// Reflection traces
// ---------------------------------------------------------------------------

/// True resonator behind a synthetic reflection trace.
#[derive(Debug, Clone, Copy)]
pub struct ReflectionTruth {
    /// ω₀ (rad/s).
    pub resonant_frequency: f64,
    /// κ_ext (rad/s).
    pub external_coupling_rate: f64,
    /// κ_int (rad/s).
    pub intrinsic_loss_rate: f64,
}

impl ReflectionTruth {
    pub fn total_linewidth(&self) -> f64 {
        self.external_coupling_rate + self.intrinsic_loss_rate
    }

    /// Ideal S11 at angular frequency ω.
    pub fn reflection(&self, omega: f64) -> C64 {
        let d = C64::new(
            0.5 * self.total_linewidth(),
            omega - self.resonant_frequency,
        );
        C64::new(1.0, 0.0) - self.external_coupling_rate / d
    }
}

/// Generate a reflection trace on a uniform grid spanning
/// `span_linewidths · κ_tot` centered on ω₀, with independent additive
/// Gaussian noise of standard deviation `noise_level` per quadrature.
/// `noise_level > 0` sets the trace's `uncertainty` so downstream fits
/// report absolute parameter errors.
pub fn reflection_trace(
    truth: &ReflectionTruth,
    n_points: usize,
    span_linewidths: f64,
    noise_level: f64,
    seed: u64,
) -> Result<ReflectionTrace> {
    if !(truth.resonant_frequency > 0.0)
        || !(truth.external_coupling_rate > 0.0)
        || truth.intrinsic_loss_rate < 0.0
    {
        return Err(Error::InvalidArgument(
            "reflection truth needs ω₀ > 0, κ_ext > 0, κ_int ≥ 0".into(),
        ));
    }
    if n_points < 5 {
        return Err(Error::InvalidArgument(format!(
            "synthetic trace needs at least 5 points, got {n_points}"
        )));
    }
    if !(span_linewidths > 0.0) || !(noise_level >= 0.0) || !noise_level.is_finite() {
        return Err(Error::InvalidArgument(
            "span must be positive and noise level non-negative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half_span = 0.5 * span_linewidths * truth.total_linewidth();
    let start = truth.resonant_frequency - half_span;
    let step = 2.0 * half_span / (n_points - 1) as f64;
    let mut frequencies = Vec::with_capacity(n_points);
    let mut values = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let omega = start + step * i as f64;
        let mut v = truth.reflection(omega);
        if noise_level > 0.0 {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            v += noise_level * C64::new(re, im);
        }
        frequencies.push(omega);
        values.push(v);
    }
    Ok(ReflectionTrace {
        frequencies,
        values,
        uncertainty: (noise_level > 0.0).then_some(noise_level),
    })
}

// ---------------------------------------------------------------------------
// Variable-temperature noise sweeps
// ---------------------------------------------------------------------------

/// True receiver behind a synthetic noise sweep.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSweepTruth {
    /// System power gain (linear).
    pub system_gain: f64,
    /// System added noise referred to the source plane (quanta).
    pub system_noise: f64,
    /// Detection bandwidth (Hz, cyclic); recorded in the trace.
    pub detection_bandwidth: f64,
    /// Signal-band center (rad/s).
    pub signal_frequency: f64,
    /// Idler/image-band center (rad/s).
    pub idler_frequency: f64,
}

/// Generate a noise sweep over the given source temperatures with
/// multiplicative Gaussian noise: psd = model · (1 + level·g). The per-point
/// 1σ (level × ideal model) is stored when `noise_level > 0`.
pub fn noise_sweep(
    truth: &NoiseSweepTruth,
    temperatures: &[f64],
    noise_level: f64,
    seed: u64,
) -> Result<NoiseTrace> {
    if !(truth.system_gain > 0.0) || !truth.system_noise.is_finite() {
        return Err(Error::InvalidArgument(
            "noise sweep truth needs positive gain and finite noise".into(),
        ));
    }
    if temperatures.is_empty() {
        return Err(Error::InvalidArgument(
            "noise sweep needs at least one temperature".into(),
        ));
    }
    if !(noise_level >= 0.0) || !noise_level.is_finite() {
        return Err(Error::InvalidArgument(
            "noise level must be non-negative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut psd = Vec::with_capacity(temperatures.len());
    let mut sigma = Vec::with_capacity(temperatures.len());
    for &t in temperatures {
        let model = noise_psd_model(
            t,
            truth.system_gain,
            truth.system_noise,
            truth.signal_frequency,
            truth.idler_frequency,
        )?;
        let value = if noise_level > 0.0 {
            let g: f64 = StandardNormal.sample(&mut rng);
            model * (1.0 + noise_level * g)
        } else {
            model
        };
        psd.push(value);
        sigma.push(noise_level * model);
    }
    Ok(NoiseTrace {
        temperatures: temperatures.to_vec(),
        psd_quanta: psd,
        sigma: (noise_level > 0.0).then_some(sigma),
        detection_bandwidth: truth.detection_bandwidth,
        signal_frequency: truth.signal_frequency,
        idler_frequency: truth.idler_frequency,
    })
}

// ---------------------------------------------------------------------------
// Magnetic-field sweeps
// ---------------------------------------------------------------------------

/// True device behind a synthetic field sweep. The added noise grows
/// quadratically from `zero_field_noise` to `max_field_noise` at
/// `max_field`.
#[derive(Debug, Clone, Copy)]
pub struct FieldSweepTruth {
    /// System power gain (linear).
    pub system_gain: f64,
    /// Base (stage) temperature during the sweep (K).
    pub base_temperature: f64,
    /// Signal-band center (rad/s).
    pub signal_frequency: f64,
    /// Idler/image-band center (rad/s).
    pub idler_frequency: f64,
    /// Input-referred added noise at zero field (quanta).
    pub zero_field_noise: f64,
    /// Input-referred added noise at `max_field` (quanta).
    pub max_field_noise: f64,
    /// Reference field for `max_field_noise` (T).
    pub max_field: f64,
}

impl FieldSweepTruth {
    /// N(B) = N₀ + (N_max − N₀)(B/B_max)².
    pub fn added_noise(&self, field: f64) -> f64 {
        let x = field / self.max_field;
        self.zero_field_noise + (self.max_field_noise - self.zero_field_noise) * x * x
    }
}

/// Generate output PSD (quanta) versus applied field with multiplicative
/// Gaussian noise, through the same model the reduction inverts:
/// psd(B) = G · [n_s(T_base) + (ω_i/ω_s)·n_i(T_base) + 0.5 + N(B)].
pub fn field_sweep(
    truth: &FieldSweepTruth,
    fields: &[f64],
    noise_level: f64,
    seed: u64,
) -> Result<Vec<FieldPoint>> {
    if !(truth.system_gain > 0.0) || !(truth.max_field > 0.0) {
        return Err(Error::InvalidArgument(
            "field sweep truth needs positive gain and reference field".into(),
        ));
    }
    if fields.is_empty() {
        return Err(Error::InvalidArgument(
            "field sweep needs at least one field point".into(),
        ));
    }
    if !(noise_level >= 0.0) || !noise_level.is_finite() {
        return Err(Error::InvalidArgument(
            "noise level must be non-negative".into(),
        ));
    }
    let background = bose_einstein_occupancy(truth.signal_frequency, truth.base_temperature)?
        + (truth.idler_frequency / truth.signal_frequency)
            * bose_einstein_occupancy(truth.idler_frequency, truth.base_temperature)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(fields.len());
    for &b in fields {
        let model = truth.system_gain * (background + 0.5 + truth.added_noise(b));
        let value = if noise_level > 0.0 {
            let g: f64 = StandardNormal.sample(&mut rng);
            model * (1.0 + noise_level * g)
        } else {
            model
        };
        points.push(FieldPoint {
            field: b,
            psd_quanta: value,
        });
    }
    Ok(points)
}
