//! Calibration reductions: linear reflection fits, variable-temperature
//! noise thermometry, device-noise extraction and field-sweep processing.
//!
//! Conventions shared by every routine here:
//! * frequencies are angular (rad/s); the detection bandwidth alone is
//!   cyclic (Hz), matching how spectrum analyzers report it;
//! * noise powers are expressed in quanta at the signal frequency,
//!   psd_quanta = P / (BW · ħω_s);
//! * the half-quantum of signal vacuum is written explicitly as 0.5, so
//!   every "added noise" number is referred to the amplifier input and a
//!   quantum-limited phase-preserving amplifier approaches 0.5 from above.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::consts::{HBAR, K_B};
use crate::error::{Error, Result};
use crate::fit::{least_squares, FitOptions};

type C64 = Complex<f64>;

/// A scalar with a 1σ uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub value: f64,
    pub sigma: f64,
}

impl Measurement {
    pub fn new(value: f64, sigma: f64) -> Self {
        Measurement { value, sigma }
    }

    /// Whether `other` lies within `n` combined standard deviations.
    pub fn consistent_with(&self, truth: f64, n: f64) -> bool {
        (self.value - truth).abs() <= n * self.sigma
    }
}

// ---------------------------------------------------------------------------
// Reflection (linear S11) calibration
// ---------------------------------------------------------------------------

/// A measured one-port reflection trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionTrace {
    /// Probe frequencies (rad/s).
    pub frequencies: Vec<f64>,
    /// Complex S11 per point.
    pub values: Vec<C64>,
    /// Per-quadrature standard deviation of the measurement noise, when
    /// known; enables absolute parameter uncertainties.
    pub uncertainty: Option<f64>,
}

impl ReflectionTrace {
    pub fn validate(&self) -> Result<()> {
        if self.frequencies.len() != self.values.len() {
            return Err(Error::InvalidArgument(format!(
                "reflection trace has {} frequencies but {} values",
                self.frequencies.len(),
                self.values.len()
            )));
        }
        if self.frequencies.len() < 5 {
            return Err(Error::Precondition(
                "reflection fit needs at least 5 trace points".into(),
            ));
        }
        if !self
            .frequencies
            .iter()
            .all(|f| f.is_finite() && *f > 0.0)
        {
            return Err(Error::InvalidArgument(
                "reflection trace frequencies must be positive and finite".into(),
            ));
        }
        if !self.values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(
                "reflection trace values must be finite".into(),
            ));
        }
        if let Some(s) = self.uncertainty {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidArgument(
                    "reflection trace uncertainty must be positive and finite".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Fitted hanger-free (direct reflection) resonator parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReflectionFit {
    /// ω₀ (rad/s).
    pub resonant_frequency: Measurement,
    /// κ_ext (rad/s).
    pub external_coupling_rate: Measurement,
    /// κ_int (rad/s).
    pub intrinsic_loss_rate: Measurement,
    /// κ_tot with covariance-aware uncertainty (rad/s).
    pub total_linewidth: Measurement,
    pub reduced_chi_square: f64,
    pub iterations: usize,
}

/// Fit S11(ω) = 1 − κ_ext / (i(ω − ω₀) + κ_tot/2) to a complex trace.
///
/// The initial guess is taken from the data: the dip position gives ω₀, the
/// full width of the |S11|² dip at its power midpoint equals κ_tot exactly
/// for this line shape, and the dip depth m = |S11(ω₀)| splits the linewidth
/// as κ_ext = κ(1+m)/2 (over-coupled branch; the complex phase steers the
/// fit to the true branch from there).
pub fn fit_reflection(trace: &ReflectionTrace) -> Result<ReflectionFit> {
    trace.validate()?;
    let n = trace.frequencies.len();

    // --- data-driven initial guess -------------------------------------
    let (i_min, v_min) = trace
        .values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .expect("non-empty validated trace");
    let omega0_guess = trace.frequencies[i_min];
    let m = v_min.norm().min(0.999);
    let threshold = 0.5 * (m * m + 1.0);
    let below: Vec<usize> = (0..n)
        .filter(|&i| trace.values[i].norm_sqr() < threshold)
        .collect();
    let span = match (below.first(), below.last()) {
        (Some(&a), Some(&b)) if b > a => {
            (trace.frequencies[b] - trace.frequencies[a]).abs()
        }
        _ => 0.0,
    };
    let full_span =
        (trace.frequencies[n - 1] - trace.frequencies[0]).abs();
    let kappa_guess = if span > 0.0 { span } else { 0.1 * full_span };
    if !(kappa_guess.is_finite() && kappa_guess > 0.0) {
        return Err(Error::IllConditioned(
            "reflection trace shows no resolvable dip".into(),
        ));
    }
    let kext_guess = 0.5 * kappa_guess * (1.0 + m);
    let kint_guess = (0.5 * kappa_guess * (1.0 - m)).max(1e-6 * kappa_guess);

    // --- weighted complex least squares ---------------------------------
    let sigma = trace.uncertainty.unwrap_or(1.0);
    let options = FitOptions {
        sigmas_supplied: trace.uncertainty.is_some(),
        ..Default::default()
    };
    let freqs = trace.frequencies.clone();
    let values = trace.values.clone();
    let outcome = least_squares(
        &[omega0_guess, kext_guess, kint_guess],
        2 * n,
        &options,
        move |p, r, mut jac| {
            let (w0, kext, kint) = (p[0], p[1], p[2]);
            if !(w0 > 0.0) || !(kext > 0.0) || kint < 0.0 {
                return Err(Error::Precondition(
                    "non-physical resonator parameters".into(),
                ));
            }
            for (i, (&w, &v)) in freqs.iter().zip(&values).enumerate() {
                let d = C64::new(0.5 * (kext + kint), w - w0);
                let model = C64::new(1.0, 0.0) - kext / d;
                let res = (v - model) / sigma;
                r[2 * i] = res.re;
                r[2 * i + 1] = res.im;
                if let Some(j) = jac.as_deref_mut() {
                    let d2 = d * d;
                    // Residual = (data − model)/σ ⇒ ∂r/∂p = −(∂model/∂p)/σ.
                    let dm_dw0 = -C64::i() * kext / d2;
                    let dm_dkext = -C64::new(1.0, 0.0) / d + kext / (2.0 * d2);
                    let dm_dkint = kext / (2.0 * d2);
                    for (k, dm) in [dm_dw0, dm_dkext, dm_dkint].into_iter().enumerate() {
                        j[(2 * i) * 3 + k] = -dm.re / sigma;
                        j[(2 * i + 1) * 3 + k] = -dm.im / sigma;
                    }
                }
            }
            Ok(())
        },
    )?;

    let cov = &outcome.covariance;
    let total_var = cov[1][1] + cov[2][2] + 2.0 * cov[1][2];
    Ok(ReflectionFit {
        resonant_frequency: Measurement::new(outcome.parameters[0], outcome.standard_errors[0]),
        external_coupling_rate: Measurement::new(
            outcome.parameters[1],
            outcome.standard_errors[1],
        ),
        intrinsic_loss_rate: Measurement::new(outcome.parameters[2], outcome.standard_errors[2]),
        total_linewidth: Measurement::new(
            outcome.parameters[1] + outcome.parameters[2],
            total_var.max(0.0).sqrt(),
        ),
        reduced_chi_square: outcome.reduced_chi_square,
        iterations: outcome.iterations,
    })
}

// ---------------------------------------------------------------------------
// Noise thermometry
// ---------------------------------------------------------------------------

/// Thermal occupancy of a mode at angular frequency ω (rad/s) in contact
/// with a bath at temperature T (K): n = 1/(exp(ħω/k_B T) − 1).
/// T = 0 returns exactly 0; negative temperatures are rejected.
pub fn bose_einstein_occupancy(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidArgument(
            "occupancy needs a positive, finite frequency".into(),
        ));
    }
    if !temperature.is_finite() || temperature < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "occupancy needs a non-negative temperature, got {temperature} K"
        )));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * omega / (K_B * temperature);
    Ok(1.0 / x.exp_m1())
}

/// Output noise density of the full receiver chain, in quanta at the signal
/// frequency, when the variable-temperature source is at temperature T:
///
/// ```text
/// S(T) = G_sys · [ n(ω_s, T) + (ω_i/ω_s)·n(ω_i, T) + 0.5 + N_sys ]
/// ```
///
/// The source radiates into both the signal band and the image (idler) band,
/// whose photons convert into the signal band with an energy re-scaling
/// ω_i/ω_s; N_sys collects everything that does not vary with T (idler
/// vacuum, device and chain added noise).
pub fn noise_psd_model(
    temperature: f64,
    system_gain: f64,
    system_noise: f64,
    signal_frequency: f64,
    idler_frequency: f64,
) -> Result<f64> {
    let ns = bose_einstein_occupancy(signal_frequency, temperature)?;
    let ni = bose_einstein_occupancy(idler_frequency, temperature)?;
    Ok(system_gain * (ns + (idler_frequency / signal_frequency) * ni + 0.5 + system_noise))
}

/// A measured variable-temperature noise sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrace {
    /// Source temperatures (K).
    pub temperatures: Vec<f64>,
    /// Measured output noise density per temperature, in quanta at the
    /// signal frequency (system gain *not* divided out).
    pub psd_quanta: Vec<f64>,
    /// 1σ uncertainties of `psd_quanta`, when known.
    pub sigma: Option<Vec<f64>>,
    /// Detection bandwidth used to form the quanta (Hz, cyclic).
    pub detection_bandwidth: f64,
    /// Signal-band center (rad/s).
    pub signal_frequency: f64,
    /// Idler/image-band center (rad/s).
    pub idler_frequency: f64,
}

impl NoiseTrace {
    pub fn validate(&self) -> Result<()> {
        if self.temperatures.len() != self.psd_quanta.len() {
            return Err(Error::InvalidArgument(format!(
                "noise trace has {} temperatures but {} power points",
                self.temperatures.len(),
                self.psd_quanta.len()
            )));
        }
        if let Some(s) = &self.sigma {
            if s.len() != self.temperatures.len() {
                return Err(Error::InvalidArgument(
                    "noise trace sigma length does not match the data".into(),
                ));
            }
            if !s.iter().all(|v| v.is_finite() && *v > 0.0) {
                return Err(Error::InvalidArgument(
                    "noise trace sigmas must be positive and finite".into(),
                ));
            }
        }
        if !self
            .temperatures
            .iter()
            .all(|t| t.is_finite() && *t >= 0.0)
        {
            return Err(Error::InvalidArgument(
                "noise trace temperatures must be non-negative and finite".into(),
            ));
        }
        if !self.psd_quanta.iter().all(|p| p.is_finite()) {
            return Err(Error::InvalidArgument(
                "noise trace powers must be finite".into(),
            ));
        }
        if !(self.detection_bandwidth.is_finite() && self.detection_bandwidth > 0.0) {
            return Err(Error::InvalidArgument(
                "detection bandwidth must be positive and finite".into(),
            ));
        }
        for (name, f) in [
            ("signal_frequency", self.signal_frequency),
            ("idler_frequency", self.idler_frequency),
        ] {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite"
                )));
            }
        }
        Ok(())
    }
}

/// Result of a noise-thermometry fit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseFitResult {
    /// System power gain G_sys (linear, output quanta per input quantum).
    pub system_gain: Measurement,
    /// System added noise N_sys referred to the source plane (quanta).
    pub system_noise: Measurement,
    /// Zero-temperature intercept of S(T)/Ĝ: 0.5 + N̂_sys (quanta). Its
    /// uncertainty is that of the noise term.
    pub vts_output_intercept: Measurement,
    pub reduced_chi_square: f64,
    pub iterations: usize,
}

/// Minimum spread of the thermal source term across the sweep; below this
/// the gain and the added noise are degenerate.
const MIN_OCCUPANCY_RATIO: f64 = 3.0;

/// Fit G_sys and N_sys to a variable-temperature noise sweep using
/// [`noise_psd_model`].
pub fn fit_noise_thermometry(trace: &NoiseTrace) -> Result<NoiseFitResult> {
    trace.validate()?;
    let n = trace.temperatures.len();
    if n < 4 {
        return Err(Error::Precondition(format!(
            "noise thermometry needs at least 4 temperature points, got {n}"
        )));
    }
    // Thermal source term s(T) per point; its spread sets identifiability.
    let ratio = trace.idler_frequency / trace.signal_frequency;
    let mut source = Vec::with_capacity(n);
    for &t in &trace.temperatures {
        let s = bose_einstein_occupancy(trace.signal_frequency, t)?
            + ratio * bose_einstein_occupancy(trace.idler_frequency, t)?;
        source.push(s);
    }
    let s_max = source.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s_min = source.iter().cloned().fold(f64::INFINITY, f64::min);
    if s_max <= 0.0 || s_max / s_min.max(1e-12) < MIN_OCCUPANCY_RATIO {
        return Err(Error::IllConditioned(format!(
            "temperature sweep spans too little thermal contrast (source term {s_min:.3e} … {s_max:.3e} quanta); gain and added noise are degenerate"
        )));
    }

    // Linear-regression starting point: S = G·s + G(0.5 + N).
    let mean_s = source.iter().sum::<f64>() / n as f64;
    let mean_p = trace.psd_quanta.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (s, p) in source.iter().zip(&trace.psd_quanta) {
        sxx += (s - mean_s) * (s - mean_s);
        sxy += (s - mean_s) * (p - mean_p);
    }
    let gain_guess = (sxy / sxx).max(1e-12);
    let noise_guess = ((mean_p - gain_guess * mean_s) / gain_guess - 0.5).max(1e-3);

    let sigmas: Vec<f64> = match &trace.sigma {
        Some(s) => s.clone(),
        None => vec![1.0; n],
    };
    let options = FitOptions {
        sigmas_supplied: trace.sigma.is_some(),
        ..Default::default()
    };
    let psd = trace.psd_quanta.clone();
    let source_for_fit = source.clone();
    let outcome = least_squares(
        &[gain_guess, noise_guess],
        n,
        &options,
        move |p, r, mut jac| {
            let (g, noise) = (p[0], p[1]);
            if g <= 0.0 {
                return Err(Error::Precondition("system gain must be positive".into()));
            }
            for (i, (&s, &y)) in source_for_fit.iter().zip(&psd).enumerate() {
                let model = g * (s + 0.5 + noise);
                r[i] = (y - model) / sigmas[i];
                if let Some(j) = jac.as_deref_mut() {
                    j[i * 2] = -(s + 0.5 + noise) / sigmas[i];
                    j[i * 2 + 1] = -g / sigmas[i];
                }
            }
            Ok(())
        },
    )?;

    let system_noise = Measurement::new(outcome.parameters[1], outcome.standard_errors[1]);
    Ok(NoiseFitResult {
        system_gain: Measurement::new(outcome.parameters[0], outcome.standard_errors[0]),
        system_noise,
        vts_output_intercept: Measurement::new(0.5 + system_noise.value, system_noise.sigma),
        reduced_chi_square: outcome.reduced_chi_square,
        iterations: outcome.iterations,
    })
}

// ---------------------------------------------------------------------------
// Device-noise extraction and physical clamping
// ---------------------------------------------------------------------------

/// Extract the device's own input-referred added noise from system-level
/// calibrations:
///
/// ```text
/// N_dev = λ·(N_meas + 0.5) − N_chain/G_dev − 0.5
/// ```
///
/// * `measured_system_noise` — N_meas from thermometry with the device on
///   (quanta, referred to the source plane);
/// * `source_line_transmission` — λ ∈ (0, 1], power transmission between the
///   source reference plane and the device input;
/// * `following_chain_noise` — N_chain of the readout chain behind the
///   device, referred to the device output (quanta);
/// * `device_gain` — linear power gain of the device (> 1).
///
/// First-order uncertainty propagation over all four inputs. The result may
/// be negative within its error bar; apply [`clamp_physical`] before
/// reporting.
pub fn device_added_noise(
    measured_system_noise: Measurement,
    source_line_transmission: Measurement,
    following_chain_noise: Measurement,
    device_gain: Measurement,
) -> Result<Measurement> {
    let n_meas = measured_system_noise.value;
    let lambda = source_line_transmission.value;
    let n_chain = following_chain_noise.value;
    let g = device_gain.value;
    if !(lambda.is_finite() && lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "source line transmission must lie in (0, 1], got {lambda}"
        )));
    }
    if !(g.is_finite() && g > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "device gain must exceed 1 (linear), got {g}"
        )));
    }
    if !n_meas.is_finite() || !n_chain.is_finite() {
        return Err(Error::InvalidArgument(
            "noise inputs must be finite".into(),
        ));
    }
    let value = lambda * (n_meas + 0.5) - n_chain / g - 0.5;
    let d_nmeas = lambda;
    let d_lambda = n_meas + 0.5;
    let d_nchain = -1.0 / g;
    let d_g = n_chain / (g * g);
    let var = (d_nmeas * measured_system_noise.sigma).powi(2)
        + (d_lambda * source_line_transmission.sigma).powi(2)
        + (d_nchain * following_chain_noise.sigma).powi(2)
        + (d_g * device_gain.sigma).powi(2);
    Ok(Measurement::new(value, var.sqrt()))
}

/// Clamp a physically non-negative quantity: small negative excursions
/// (within 2σ of zero) are set to zero with a warning; anything further
/// negative indicates a broken calibration and is an error.
pub fn clamp_physical(m: Measurement, quantity: &str) -> Result<(Measurement, Option<String>)> {
    if m.value >= 0.0 {
        return Ok((m, None));
    }
    if -m.value <= 2.0 * m.sigma {
        let warning = format!(
            "{quantity} came out negative ({:.4e} ± {:.4e}) but is consistent with zero; clamped to 0",
            m.value, m.sigma
        );
        Ok((Measurement::new(0.0, m.sigma), Some(warning)))
    } else {
        Err(Error::Record(format!(
            "{quantity} is negative by more than 2σ ({:.4e} ± {:.4e}); the calibration inputs are inconsistent",
            m.value, m.sigma
        )))
    }
}

// ---------------------------------------------------------------------------
// Field-sweep reduction
// ---------------------------------------------------------------------------

/// Calibrations carried between operations (serialized to/from records).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CalibrationRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reflection: Option<ReflectionFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseFitResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub device_noise: Option<Measurement>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// One magnetic-field point of a PSD sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint {
    /// Applied in-plane field (T).
    pub field: f64,
    /// Output noise density, quanta at the signal frequency.
    pub psd_quanta: f64,
}

/// Added noise versus applied field, after removing the calibrated gain and
/// the base-temperature thermal background.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSweepReduction {
    /// Applied fields (T).
    pub fields: Vec<f64>,
    /// Input-referred added noise per field point (quanta).
    pub added_noise: Vec<Measurement>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Reduce a field sweep of output PSD to added noise per field point:
/// N(B) = psd(B)/Ĝ − [n(ω_s, T_base) + (ω_i/ω_s)n(ω_i, T_base)] − 0.5.
///
/// Requires a noise-thermometry calibration in `record`; its gain
/// uncertainty is propagated into every point. Points clamped at zero carry
/// a warning in the result.
pub fn field_sweep_reduction(
    points: &[FieldPoint],
    record: &CalibrationRecord,
    base_temperature: f64,
    signal_frequency: f64,
    idler_frequency: f64,
) -> Result<FieldSweepReduction> {
    let noise_cal = record.noise.as_ref().ok_or_else(|| {
        Error::MissingCalibration(
            "field-sweep reduction needs a noise-thermometry calibration (system gain) in the record".into(),
        )
    })?;
    if points.is_empty() {
        return Err(Error::InvalidArgument("field sweep has no points".into()));
    }
    for p in points {
        if !p.field.is_finite() || !p.psd_quanta.is_finite() {
            return Err(Error::InvalidArgument(
                "field sweep points must be finite".into(),
            ));
        }
    }
    let g = noise_cal.system_gain;
    if g.value <= 0.0 {
        return Err(Error::MissingCalibration(
            "calibrated system gain is not positive".into(),
        ));
    }
    let background = bose_einstein_occupancy(signal_frequency, base_temperature)?
        + (idler_frequency / signal_frequency)
            * bose_einstein_occupancy(idler_frequency, base_temperature)?;
    let mut fields = Vec::with_capacity(points.len());
    let mut added = Vec::with_capacity(points.len());
    let mut warnings = Vec::new();
    for p in points {
        let value = p.psd_quanta / g.value - background - 0.5;
        // Gain uncertainty propagates as ∂/∂G = −psd/G².
        let sigma = (p.psd_quanta * g.sigma / (g.value * g.value)).abs();
        let (m, warning) = clamp_physical(
            Measurement::new(value, sigma),
            &format!("added noise at {:.4} T", p.field),
        )?;
        if let Some(w) = warning {
            warnings.push(w);
        }
        fields.push(p.field);
        added.push(m);
    }
    Ok(FieldSweepReduction {
        fields,
        added_noise: added,
        warnings,
    })
}
