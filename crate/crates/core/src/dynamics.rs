//! Two-tone pumped Kerr amplifier dynamics.
//!
//! The resonator's Kerr nonlinearity K (rad/s per photon) is driven by two
//! pump tones at ω_p1 < ω_p2. In the frame rotating at the tone center
//! ω_c = (ω_p1 + ω_p2)/2, four-wave mixing couples a signal at ω_c + δ to an
//! idler at ω_c − δ with strength ε = K·B·C, where B and C are the complex
//! intracavity pump amplitudes (photon½ units). The pumps also pull the
//! resonance: each tone shifts itself by (K/2)·(own photons + 2·other
//! photons), and the signal band sees a cross-Kerr shift of K(|B|² + |C|²).
//!
//! Everything downstream — amplitude gain, phase-sensitive gain, added
//! noise, bandwidth, compression — reduces to the effective detuning
//! Δ = (ω₀ − ω_c) + K(|B|² + |C|²) and ε through the standard two-mode
//! scattering coefficients.
//!
//! A practical consequence of the positive Kerr pull: centering the tones on
//! the *bare* resonance pins Δ ≥ 2|ε| (arithmetic–geometric mean), which
//! keeps the drive below threshold at all powers and caps the gain near
//! 1 dB. High gain requires centering the tones on the *dressed* resonance
//! ω₀ + K(|B|²+|C|²), which [`dressed_drive`] solves self-consistently.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::circuit::DerivedCircuit;
use crate::consts::{ratio_to_db, HBAR};
use crate::error::{Error, Result};

type C64 = Complex<f64>;

/// Two pump tones addressed at the device, all SI (rad/s, W, rad).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    /// Lower pump frequency ω_p1 (rad/s).
    pub pump1_frequency: f64,
    /// Upper pump frequency ω_p2 (rad/s); must exceed ω_p1.
    pub pump2_frequency: f64,
    /// Power of the lower tone at the device port (W).
    pub pump1_power: f64,
    /// Power of the upper tone at the device port (W).
    pub pump2_power: f64,
    /// Phase of the lower tone (rad).
    pub pump1_phase: f64,
    /// Phase of the upper tone (rad).
    pub pump2_phase: f64,
}

impl DriveConfig {
    /// Symmetric two-tone drive: tones at `center ± offset` with equal
    /// per-tone power and the given phases.
    pub fn symmetric(center: f64, offset: f64, per_tone_power: f64, phase1: f64, phase2: f64) -> Self {
        DriveConfig {
            pump1_frequency: center - offset,
            pump2_frequency: center + offset,
            pump1_power: per_tone_power,
            pump2_power: per_tone_power,
            pump1_phase: phase1,
            pump2_phase: phase2,
        }
    }

    /// Tone center ω_c = (ω_p1 + ω_p2)/2 (rad/s).
    pub fn center_frequency(&self) -> f64 {
        0.5 * (self.pump1_frequency + self.pump2_frequency)
    }

    /// Half the tone separation (rad/s).
    pub fn pump_offset(&self) -> f64 {
        0.5 * (self.pump2_frequency - self.pump1_frequency)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("pump1_frequency", self.pump1_frequency),
            ("pump2_frequency", self.pump2_frequency),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite"
                )));
            }
        }
        if self.pump2_frequency <= self.pump1_frequency {
            return Err(Error::InvalidArgument(
                "pump2_frequency must exceed pump1_frequency; the two-tone scheme needs distinct tones (pass them in ascending order)".into(),
            ));
        }
        for (name, v) in [
            ("pump1_power", self.pump1_power),
            ("pump2_power", self.pump2_power),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be non-negative and finite"
                )));
            }
        }
        if !self.pump1_phase.is_finite() || !self.pump2_phase.is_finite() {
            return Err(Error::InvalidArgument("pump phases must be finite".into()));
        }
        Ok(())
    }
}

/// Pump separation beyond this fraction of the carrier invalidates the
/// narrow-band (rotating-wave) description; recorded as a flag, not an error.
const RWA_SEPARATION_FRACTION: f64 = 0.05;

/// Steady intracavity pump configuration and the derived mixing parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpState {
    /// Intracavity amplitude of the lower tone (photon½).
    pub amplitude_b: C64,
    /// Intracavity amplitude of the upper tone (photon½).
    pub amplitude_c: C64,
    /// |B|² (photons).
    pub photons_b: f64,
    /// |C|² (photons).
    pub photons_c: f64,
    /// Parametric coupling ε = K·B·C (rad/s, complex).
    pub parametric_strength: C64,
    /// Cross-Kerr shift of the signal band, K(|B|²+|C|²) (rad/s).
    pub cross_kerr_shift: f64,
    /// Effective signal-band detuning Δ = (ω₀ − ω_c) + K(|B|²+|C|²) (rad/s).
    pub effective_detuning: f64,
    /// Tone center ω_c (rad/s).
    pub center_frequency: f64,
    /// Whether the slow-flow fixed point is dynamically stable (always true
    /// on the success path; unstable points are returned as errors).
    pub stable: bool,
    /// Whether the tone separation is small enough for the narrow-band model.
    pub rwa_separation_ok: bool,
    /// Fixed-point iterations used.
    pub iterations: usize,
}

impl PumpState {
    /// Oscillation threshold sqrt(Δ² + (κ/2)²) for |ε| (rad/s).
    pub fn threshold(&self, circuit: &DerivedCircuit) -> f64 {
        let kappa = circuit.total_decay_rate();
        (self.effective_detuning.powi(2) + 0.25 * kappa * kappa).sqrt()
    }

    /// |ε| / threshold; below 1 the linearized response is finite.
    pub fn threshold_ratio(&self, circuit: &DerivedCircuit) -> f64 {
        self.parametric_strength.norm() / self.threshold(circuit)
    }
}

/// Linear (pump-off) reflection coefficient
/// S11(ω) = 1 − κ_ext / (i(ω − ω₀) + κ_tot/2).
pub fn reflection_coefficient(circuit: &DerivedCircuit, omega: f64) -> C64 {
    let kappa = circuit.total_decay_rate();
    let denom = C64::new(0.5 * kappa, omega - circuit.resonant_frequency);
    C64::new(1.0, 0.0) - circuit.external_coupling_rate / denom
}

/// Solve the intracavity pump amplitudes for a two-tone drive.
///
/// Slow-flow equations in each tone's own rotating frame (RWA, cross terms
/// at ±2·offset dropped):
///
/// ```text
/// dB/dt = −[i(ω₀−ω_p1) + κ/2]B − i(K/2)(|B|² + 2|C|²)B + √κ_ext A₁
/// dC/dt = −[i(ω₀−ω_p2) + κ/2]C − i(K/2)(|C|² + 2|B|²)C + √κ_ext A₂
/// ```
///
/// with drive amplitudes A_j = sqrt(P_j/(ħω_pj))·e^{iφ_j} (photon½/s·½ flux
/// units). The damped fixed-point iteration starts from the empty cavity, so
/// in a bistable regime this returns the branch continuously connected to
/// zero field. The fixed point's 4×4 real Jacobian is then checked; a
/// dynamically unstable point is returned as [`Error::PumpUnstable`].
pub fn pump_steady_state(circuit: &DerivedCircuit, drive: &DriveConfig) -> Result<PumpState> {
    drive.validate()?;
    let kappa = circuit.total_decay_rate();
    let k = circuit.kerr_coefficient;
    let omega0 = circuit.resonant_frequency;
    let omega_c = drive.center_frequency();
    let rwa_separation_ok =
        (drive.pump2_frequency - drive.pump1_frequency) < RWA_SEPARATION_FRACTION * omega_c;

    let a1 = C64::from_polar(
        (drive.pump1_power / (HBAR * drive.pump1_frequency)).sqrt(),
        drive.pump1_phase,
    );
    let a2 = C64::from_polar(
        (drive.pump2_power / (HBAR * drive.pump2_frequency)).sqrt(),
        drive.pump2_phase,
    );
    let root_kext = circuit.external_coupling_rate.sqrt();
    let delta1 = omega0 - drive.pump1_frequency;
    let delta2 = omega0 - drive.pump2_frequency;

    // Fixed-point map: B ← √κ_ext A₁ / [i(δ₁ + (K/2)(|B|²+2|C|²)) + κ/2].
    let map = |b: C64, c: C64| -> (C64, C64) {
        let nb = b.norm_sqr();
        let nc = c.norm_sqr();
        let db = delta1 + 0.5 * k * (nb + 2.0 * nc);
        let dc = delta2 + 0.5 * k * (nc + 2.0 * nb);
        (
            root_kext * a1 / C64::new(0.5 * kappa, db),
            root_kext * a2 / C64::new(0.5 * kappa, dc),
        )
    };

    let mut b = C64::new(0.0, 0.0);
    let mut c = C64::new(0.0, 0.0);
    let mut eta: f64 = 0.5;
    let mut prev_residual = f64::INFINITY;
    let mut iterations = 0;
    const MAX_ITER: usize = 50_000;
    const TOL: f64 = 1e-13;
    let mut converged = false;
    for iter in 1..=MAX_ITER {
        iterations = iter;
        let (bn, cn) = map(b, c);
        let residual = ((bn - b).norm_sqr() + (cn - c).norm_sqr()).sqrt();
        let scale = (b.norm_sqr() + c.norm_sqr()).sqrt().max(1.0);
        if residual <= TOL * scale {
            b = bn;
            c = cn;
            converged = true;
            break;
        }
        if residual > prev_residual {
            eta = (eta * 0.5).max(1.0 / 64.0);
        }
        prev_residual = residual;
        b += eta * (bn - b);
        c += eta * (cn - c);
        if !b.is_finite() || !c.is_finite() {
            return Err(Error::PumpUnstable {
                message: "pump amplitudes diverged during fixed-point iteration".into(),
                b_sq: f64::NAN,
                c_sq: f64::NAN,
            });
        }
    }
    if !converged {
        return Err(Error::NoSolution(format!(
            "pump slow flow did not settle within {MAX_ITER} iterations; the drive may sit on a bistable edge"
        )));
    }

    // Stability of the fixed point: eigenvalues of the 4×4 real Jacobian in
    // (Re B, Im B, Re C, Im C). Complex-pair derivatives of dB/dt:
    //   ∂/∂B  = −[iδ₁ + κ/2] − iK(|B|² + |C|²)
    //   ∂/∂B* = −i(K/2)B²
    //   ∂/∂C  = −iK C* B
    //   ∂/∂C* = −iK C B
    // and symmetrically for dC/dt.
    let nb = b.norm_sqr();
    let nc = c.norm_sqr();
    let i = C64::i();
    let f_b = -(i * delta1 + 0.5 * kappa) - i * k * (nb + nc);
    let f_bstar = -i * (0.5 * k) * b * b;
    let f_c = -i * k * c.conj() * b;
    let f_cstar = -i * k * c * b;
    let g_c = -(i * delta2 + 0.5 * kappa) - i * k * (nb + nc);
    let g_cstar = -i * (0.5 * k) * c * c;
    let g_b = -i * k * b.conj() * c;
    let g_bstar = -i * k * b * c;

    let mut jac = DMatrix::<f64>::zeros(4, 4);
    let mut put = |row: usize, col: usize, d_z: C64, d_zstar: C64| {
        // d(Re f)/dx, d(Re f)/dy, d(Im f)/dx, d(Im f)/dy for f(z), z = x+iy.
        let sum = d_z + d_zstar;
        let diff = d_z - d_zstar;
        jac[(row, col)] = sum.re;
        jac[(row, col + 1)] = -diff.im;
        jac[(row + 1, col)] = sum.im;
        jac[(row + 1, col + 1)] = diff.re;
    };
    put(0, 0, f_b, f_bstar);
    put(0, 2, f_c, f_cstar);
    put(2, 0, g_b, g_bstar);
    put(2, 2, g_c, g_cstar);
    let eigen = jac.complex_eigenvalues();
    let max_re = eigen.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let kappa_scale = 1e-9 * kappa;
    if max_re > kappa_scale {
        return Err(Error::PumpUnstable {
            message: format!(
                "slow-flow fixed point has a growing mode (max eigenvalue {max_re:.6e} 1/s)"
            ),
            b_sq: nb,
            c_sq: nc,
        });
    }

    let eps = k * b * c;
    let cross_kerr_shift = k * (nb + nc);
    Ok(PumpState {
        amplitude_b: b,
        amplitude_c: c,
        photons_b: nb,
        photons_c: nc,
        parametric_strength: eps,
        cross_kerr_shift,
        effective_detuning: (omega0 - omega_c) + cross_kerr_shift,
        center_frequency: omega_c,
        stable: true,
        rwa_separation_ok,
        iterations,
    })
}

/// Scattering of a signal at ω_c + δ off the pumped resonator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringCoefficients {
    /// Signal → signal amplitude g_s(δ).
    pub signal: C64,
    /// Idler-conjugate → signal amplitude g_i(δ).
    pub idler: C64,
    /// Internal-loss port → signal amplitude l_s(δ).
    pub loss_signal: C64,
    /// Internal-loss idler-conjugate → signal amplitude l_i(δ).
    pub loss_idler: C64,
}

impl ScatteringCoefficients {
    /// Signal power gain |g_s|² in dB.
    pub fn signal_gain_db(&self) -> f64 {
        ratio_to_db(self.signal.norm_sqr())
    }

    /// |g_s|² − |g_i|² + |l_s|² − |l_i|²; the bosonic commutator of the
    /// output field, exactly 1 for any admissible scattering (daggered
    /// inputs contribute negatively).
    pub fn commutator_sum(&self) -> f64 {
        self.signal.norm_sqr() - self.idler.norm_sqr() + self.loss_signal.norm_sqr()
            - self.loss_idler.norm_sqr()
    }
}

/// Oscillation threshold for the parametric strength at detuning Δ (rad/s).
pub fn oscillation_threshold(circuit: &DerivedCircuit, effective_detuning: f64) -> f64 {
    let kappa = circuit.total_decay_rate();
    (effective_detuning.powi(2) + 0.25 * kappa * kappa).sqrt()
}

fn ensure_below_threshold(circuit: &DerivedCircuit, pump: &PumpState) -> Result<()> {
    let eps = pump.parametric_strength.norm();
    let threshold = oscillation_threshold(circuit, pump.effective_detuning);
    if eps >= threshold {
        return Err(Error::DivergentGain { eps, threshold });
    }
    Ok(())
}

/// Two-mode scattering coefficients at signal offset δ from the tone center.
///
/// With Δ the effective detuning and D(δ) = (κ/2 + iδ)² + Δ² − |ε|²:
///
/// ```text
/// g_s = 1 − κ_ext (κ/2 + i(Δ+δ)) / D        (signal reflection gain)
/// g_i = i ε κ_ext / D                        (idler conversion)
/// l_s = −sqrt(κ_ext κ_int)(κ/2 + i(Δ+δ)) / D (loss-port leakage)
/// l_i = i ε sqrt(κ_ext κ_int) / D
/// ```
///
/// Reduces to the linear S11 when ε = 0. Errors with
/// [`Error::DivergentGain`] at or above threshold.
pub fn scattering_coefficients(
    circuit: &DerivedCircuit,
    pump: &PumpState,
    delta: f64,
) -> Result<ScatteringCoefficients> {
    ensure_below_threshold(circuit, pump)?;
    let kappa = circuit.total_decay_rate();
    let kext = circuit.external_coupling_rate;
    let kint = circuit.intrinsic_loss_rate;
    let dd = pump.effective_detuning;
    let eps = pump.parametric_strength;
    let half = C64::new(0.5 * kappa, delta);
    let d = half * half + C64::new(dd * dd - eps.norm_sqr(), 0.0);
    let numer = C64::new(0.5 * kappa, dd + delta);
    let root_cross = (kext * kint).sqrt();
    Ok(ScatteringCoefficients {
        signal: C64::new(1.0, 0.0) - kext * numer / d,
        idler: C64::i() * eps * kext / d,
        loss_signal: -root_cross * numer / d,
        loss_idler: C64::i() * eps * root_cross / d,
    })
}

/// Signal power gain at the tone center (δ = 0), in dB.
pub fn center_gain_db(circuit: &DerivedCircuit, pump: &PumpState) -> Result<f64> {
    Ok(scattering_coefficients(circuit, pump, 0.0)?.signal_gain_db())
}

/// Frequency-resolved gain of the pumped amplifier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GainSpectrum {
    /// Tone center ω_c (rad/s).
    pub center_frequency: f64,
    /// Absolute signal frequencies ω_c + δ (rad/s).
    pub frequencies: Vec<f64>,
    /// g_s(δ) per point.
    pub signal: Vec<C64>,
    /// g_i(δ) per point.
    pub idler: Vec<C64>,
    /// |g_s|² per point, dB.
    pub gain_db: Vec<f64>,
}

/// Offsets farther than this many linewidths from the tone center are
/// outside the model's narrow-band validity and are rejected.
const MAX_OFFSET_LINEWIDTHS: f64 = 5.0;

/// Evaluate the gain spectrum at the given signal offsets δ (rad/s) from the
/// tone center. Pass an empty slice for the default grid of 2001 points
/// spanning ±κ_tot.
pub fn gain_spectrum(
    circuit: &DerivedCircuit,
    pump: &PumpState,
    offsets: &[f64],
) -> Result<GainSpectrum> {
    let kappa = circuit.total_decay_rate();
    let grid: Vec<f64> = if offsets.is_empty() {
        let n = 2001;
        (0..n)
            .map(|i| -kappa + 2.0 * kappa * i as f64 / (n - 1) as f64)
            .collect()
    } else {
        for &d in offsets {
            if !d.is_finite() || d.abs() > MAX_OFFSET_LINEWIDTHS * kappa {
                return Err(Error::InvalidArgument(format!(
                    "signal offset {d:.6e} rad/s lies beyond {MAX_OFFSET_LINEWIDTHS} linewidths of the tone center; the narrow-band response is not valid there"
                )));
            }
        }
        offsets.to_vec()
    };
    let mut signal = Vec::with_capacity(grid.len());
    let mut idler = Vec::with_capacity(grid.len());
    let mut gain_db = Vec::with_capacity(grid.len());
    for &d in &grid {
        let sc = scattering_coefficients(circuit, pump, d)?;
        gain_db.push(sc.signal_gain_db());
        signal.push(sc.signal);
        idler.push(sc.idler);
    }
    Ok(GainSpectrum {
        center_frequency: pump.center_frequency,
        frequencies: grid.iter().map(|d| pump.center_frequency + d).collect(),
        signal,
        idler,
        gain_db,
    })
}

/// Full width (rad/s) over which the signal gain stays within 3 dB of its
/// peak. The peak is located by a coarse scan over ±2κ, then each half-power
/// crossing is bisected to machine precision.
pub fn half_power_bandwidth(circuit: &DerivedCircuit, pump: &PumpState) -> Result<f64> {
    let kappa = circuit.total_decay_rate();
    let gain_at = |d: f64| -> Result<f64> {
        Ok(scattering_coefficients(circuit, pump, d)?.signal.norm_sqr())
    };
    let span = 2.0 * kappa;
    let n = 4001;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..n {
        let d = -span + 2.0 * span * i as f64 / (n - 1) as f64;
        let g = gain_at(d)?;
        if g > best.1 {
            best = (d, g);
        }
    }
    let (d_peak, g_peak) = best;
    let g_half = 0.5 * g_peak;

    let crossing = |mut inside: f64, mut outside: f64| -> Result<f64> {
        // gain(inside) ≥ g_half > gain(outside); bisect the boundary.
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if gain_at(mid)? >= g_half {
                inside = mid;
            } else {
                outside = mid;
            }
            if (outside - inside).abs() <= 1e-9 {
                break;
            }
        }
        Ok(0.5 * (inside + outside))
    };

    // March outward from the peak until the gain falls below half power.
    let step = span / (n - 1) as f64;
    let mut hi = d_peak;
    loop {
        let next = hi + step;
        if next > MAX_OFFSET_LINEWIDTHS * kappa {
            return Err(Error::RangeExhausted(
                "upper half-power point not found within five linewidths".into(),
            ));
        }
        if gain_at(next)? < g_half {
            hi = crossing(hi, next)?;
            break;
        }
        hi = next;
    }
    let mut lo = d_peak;
    loop {
        let next = lo - step;
        if next < -MAX_OFFSET_LINEWIDTHS * kappa {
            return Err(Error::RangeExhausted(
                "lower half-power point not found within five linewidths".into(),
            ));
        }
        if gain_at(next)? < g_half {
            lo = crossing(lo, next)?;
            break;
        }
        lo = next;
    }
    Ok(hi - lo)
}

/// Phase-sensitive response of a tone placed exactly at the tone center.
///
/// At δ = 0 the signal and idler coincide, so the output amplitude for a
/// unit input with phase φ is g_s(0) + g_i(0)·e^{−2iφ}: deamplification and
/// amplification alternate with period π in φ. The two paths add coherently
/// when −2φ + arg(g_i) = arg(g_s), so the amplified-quadrature input phase
/// is φ_amp = (arg g_i − arg g_s)/2, which tracks half the pump-phase sum
/// through arg(ε).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseSweep {
    /// Input signal phases φ (rad), as supplied.
    pub phases: Vec<f64>,
    /// φ − φ_amp wrapped to (−π/2, π/2]: phase relative to the amplified
    /// quadrature (maximum gain at 0, maximum squeezing at ±π/2).
    pub relative_phases: Vec<f64>,
    /// Output amplitude g_s(0) + g_i(0)e^{−2iφ} per input phase.
    pub amplitude: Vec<C64>,
    /// Power gain per input phase, dB.
    pub gain_db: Vec<f64>,
    /// Largest gain over the sweep (dB).
    pub max_gain_db: f64,
    /// Smallest gain over the sweep (dB).
    pub min_gain_db: f64,
    /// True when |ε| = 0 (no parametric drive): the sweep is flat and the
    /// phase reference arbitrary.
    pub no_parametric_drive: bool,
}

/// Evaluate the phase-sensitive gain for the given input phases (rad).
pub fn phase_sensitive_gain(
    circuit: &DerivedCircuit,
    pump: &PumpState,
    phases: &[f64],
) -> Result<PhaseSweep> {
    if phases.is_empty() {
        return Err(Error::InvalidArgument(
            "phase sweep needs at least one input phase".into(),
        ));
    }
    let sc = scattering_coefficients(circuit, pump, 0.0)?;
    let eps = pump.parametric_strength;
    let no_parametric_drive = eps.norm() == 0.0;
    let axis = 0.5 * (sc.idler.arg() - sc.signal.arg());
    let mut amplitude = Vec::with_capacity(phases.len());
    let mut gain_db = Vec::with_capacity(phases.len());
    let mut relative_phases = Vec::with_capacity(phases.len());
    let mut max_gain_db = f64::NEG_INFINITY;
    let mut min_gain_db = f64::INFINITY;
    for &phi in phases {
        if !phi.is_finite() {
            return Err(Error::InvalidArgument("input phases must be finite".into()));
        }
        let out = sc.signal + sc.idler * C64::from_polar(1.0, -2.0 * phi);
        let g = ratio_to_db(out.norm_sqr());
        max_gain_db = max_gain_db.max(g);
        min_gain_db = min_gain_db.min(g);
        amplitude.push(out);
        gain_db.push(g);
        // Wrap φ − axis into (−π/2, π/2]; the response has period π.
        let mut rel = (phi - axis) % std::f64::consts::PI;
        if rel > 0.5 * std::f64::consts::PI {
            rel -= std::f64::consts::PI;
        } else if rel <= -0.5 * std::f64::consts::PI {
            rel += std::f64::consts::PI;
        }
        relative_phases.push(rel);
    }
    Ok(PhaseSweep {
        phases: phases.to_vec(),
        relative_phases,
        amplitude,
        gain_db,
        max_gain_db,
        min_gain_db,
        no_parametric_drive,
    })
}

/// Input-referred added noise of the phase-preserving amplifier.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AddedNoise {
    /// Signal power gain at the evaluated offset (dB).
    pub signal_gain_db: f64,
    /// Added noise referred to the input (quanta).
    pub added_quanta: f64,
    /// The loss-free bound (1 − 1/G)/2 at the same gain (quanta).
    pub quantum_limit_quanta: f64,
    /// added_quanta − quantum_limit_quanta (≥ 0; grows with κ_int).
    pub excess_quanta: f64,
}

/// Added noise of the pumped amplifier at signal offset δ, assuming vacuum
/// at the idler and loss ports:
/// N = (|g_i|² + |l_s|² + |l_i|²) / (2|g_s|²) quanta.
pub fn ideal_added_noise(
    circuit: &DerivedCircuit,
    pump: &PumpState,
    delta: f64,
) -> Result<AddedNoise> {
    let sc = scattering_coefficients(circuit, pump, delta)?;
    let g = sc.signal.norm_sqr();
    let added = (sc.idler.norm_sqr() + sc.loss_signal.norm_sqr() + sc.loss_idler.norm_sqr())
        / (2.0 * g);
    let limit = 0.5 * (1.0 - 1.0 / g);
    Ok(AddedNoise {
        signal_gain_db: ratio_to_db(g),
        added_quanta: added,
        quantum_limit_quanta: limit,
        excess_quanta: added - limit,
    })
}

/// Gain compression against input signal power.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CompressionPoint {
    /// Small-signal gain at the tone center (dB).
    pub small_signal_gain_db: f64,
    /// Input power where the gain departs by 1 dB (W).
    pub input_power_1db: f64,
    /// Same, in dBm.
    pub input_power_1db_dbm: f64,
    /// Signal-band intracavity photons at the 1 dB point.
    pub intracavity_photons_at_1db: f64,
}

/// Quasi-static signal-induced Kerr shift: the signal's own intracavity
/// photons n add to the cross-Kerr detuning, Δ′ = Δ + K·n, which detunes the
/// operating point and compresses the gain. Pump depletion is not modeled,
/// so this is the *onset* mechanism valid near the 1 dB point.
///
/// For input photon flux F = P/(ħω_c) the self-consistent photon number
/// satisfies n = κ_ext·F·[(κ²/4 + Δ′²) + |ε|²] / D′², D′ = κ²/4 + Δ′² − |ε|²,
/// counting both signal and idler intracavity fields.
fn compressed_gain(
    circuit: &DerivedCircuit,
    pump: &PumpState,
    input_power: f64,
) -> Result<(f64, f64)> {
    let kappa = circuit.total_decay_rate();
    let kext = circuit.external_coupling_rate;
    let k = circuit.kerr_coefficient;
    let eps_sq = pump.parametric_strength.norm_sqr();
    let delta0 = pump.effective_detuning;
    let flux = input_power / (HBAR * pump.center_frequency);
    let quarter = 0.25 * kappa * kappa;

    let mut n = 0.0f64;
    let mut converged = false;
    for _ in 0..10_000 {
        let dp = delta0 + k * n;
        let d = quarter + dp * dp - eps_sq;
        if d <= 0.0 {
            return Err(Error::DivergentGain {
                eps: eps_sq.sqrt(),
                threshold: (quarter + dp * dp).sqrt(),
            });
        }
        let n_new = kext * flux * ((quarter + dp * dp) + eps_sq) / (d * d);
        // Damped update; the map is contracting for compression-level powers.
        let next = 0.5 * (n + n_new);
        if (next - n).abs() <= 1e-12 * next.max(1e-30) {
            n = next;
            converged = true;
            break;
        }
        n = next;
    }
    if !converged {
        return Err(Error::NoSolution(
            "signal self-consistency did not settle; input power is beyond the quasi-static compression model".into(),
        ));
    }
    let dp = delta0 + k * n;
    let d = quarter + dp * dp - eps_sq;
    let g = C64::new(1.0, 0.0) - kext * C64::new(0.5 * kappa, dp) / C64::new(d, 0.0);
    Ok((ratio_to_db(g.norm_sqr()), n))
}

/// Find the 1 dB input compression point of the pumped amplifier.
///
/// Requires a usable operating point (small-signal gain ≥ 3 dB). The power
/// is grown decade-by-decade from 1 zW until the gain departs by over 1 dB,
/// then the crossing is bisected to 0.001 dB.
pub fn compression_point(
    circuit: &DerivedCircuit,
    pump: &PumpState,
) -> Result<CompressionPoint> {
    ensure_below_threshold(circuit, pump)?;
    let (g0, _) = compressed_gain(circuit, pump, 0.0)?;
    if g0 < 3.0 {
        return Err(Error::Precondition(format!(
            "compression point needs an amplifying operating point; small-signal gain is {g0:.2} dB"
        )));
    }
    let deviation = |p: f64| -> Result<f64> {
        let (g, _) = compressed_gain(circuit, pump, p)?;
        Ok((g - g0).abs())
    };
    let mut p_lo = 1e-21;
    if deviation(p_lo)? >= 1.0 {
        return Err(Error::Precondition(
            "gain is already compressed by 1 dB at 1 zW input; operating point is too close to threshold for the quasi-static model".into(),
        ));
    }
    let mut p_hi = p_lo;
    loop {
        p_hi *= 10.0;
        if p_hi > 1.0 {
            return Err(Error::RangeExhausted(
                "no 1 dB compression found below 1 W input".into(),
            ));
        }
        match deviation(p_hi) {
            Ok(dev) if dev >= 1.0 => break,
            Ok(_) => {
                p_lo = p_hi;
            }
            // Self-consistency breakdown above the compression point also
            // brackets the crossing.
            Err(Error::NoSolution(_)) | Err(Error::DivergentGain { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    for _ in 0..200 {
        let mid = (p_lo * p_hi).sqrt();
        match deviation(mid) {
            Ok(dev) if dev < 1.0 => p_lo = mid,
            Ok(_) => p_hi = mid,
            Err(Error::NoSolution(_)) | Err(Error::DivergentGain { .. }) => p_hi = mid,
            Err(e) => return Err(e),
        }
        if (p_hi / p_lo).ln().abs() < 1e-4 {
            break;
        }
    }
    let p_1db = (p_lo * p_hi).sqrt();
    let (_, n) = compressed_gain(circuit, pump, p_1db)?;
    Ok(CompressionPoint {
        small_signal_gain_db: g0,
        input_power_1db: p_1db,
        input_power_1db_dbm: crate::consts::watts_to_dbm(p_1db),
        intracavity_photons_at_1db: n,
    })
}

/// A drive solved against the dressed (power-shifted) resonance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub drive: DriveConfig,
    pub pump: PumpState,
    /// Signal gain at the tone center (dB).
    pub gain_db: f64,
}

/// Center the tone pair on the dressed resonance for a given per-tone power.
///
/// Solves ω_c = ω₀ + K(|B|² + |C|²) self-consistently (damped iteration,
/// factor ½) so that the effective detuning vanishes. This is the
/// configuration that actually reaches high gain; centering on the bare
/// resonance leaves Δ = 2|ε|·cosh(…) ≥ 2|ε| and caps the gain near 1 dB.
pub fn dressed_drive(
    circuit: &DerivedCircuit,
    pump_offset: f64,
    per_tone_power: f64,
    phase1: f64,
    phase2: f64,
) -> Result<OperatingPoint> {
    if !(pump_offset.is_finite() && pump_offset > 0.0) {
        return Err(Error::InvalidArgument(
            "pump offset must be positive and finite".into(),
        ));
    }
    let kappa = circuit.total_decay_rate();
    let mut omega_c = circuit.resonant_frequency;
    let mut last: Option<(DriveConfig, PumpState)> = None;
    let mut converged = false;
    for _ in 0..500 {
        let drive = DriveConfig::symmetric(omega_c, pump_offset, per_tone_power, phase1, phase2);
        let state = pump_steady_state(circuit, &drive)?;
        let target = circuit.resonant_frequency + state.cross_kerr_shift;
        let step = target - omega_c;
        last = Some((drive, state));
        if step.abs() <= 1e-10 * kappa {
            converged = true;
            break;
        }
        omega_c += 0.5 * step;
    }
    let (drive, pump) = last.expect("at least one iteration ran");
    if !converged {
        return Err(Error::NoSolution(
            "dressed-resonance centering did not converge; the operating point may be beyond the stable power range".into(),
        ));
    }
    let gain_db = center_gain_db(circuit, &pump)?;
    Ok(OperatingPoint {
        drive,
        pump,
        gain_db,
    })
}

/// Parametric strength |ε| (rad/s) that yields a given center gain for a
/// zero-detuned operating point: from |g_s(0)| = (κ_ext κ/2)/(κ²/4 − |ε|²) − 1,
///
/// ```text
/// |ε|² = κ²/4 − κ_ext κ / (2 (1 + sqrt(G)))
/// ```
///
/// Valid for overcoupled devices (κ_ext > κ_int) and G ≥ 1.
pub fn epsilon_for_center_gain(circuit: &DerivedCircuit, gain_db: f64) -> Result<f64> {
    if circuit.external_coupling_rate <= circuit.intrinsic_loss_rate {
        return Err(Error::Precondition(
            "gain targeting assumes an overcoupled device (kappa_ext > kappa_int)".into(),
        ));
    }
    if gain_db < 0.0 {
        return Err(Error::InvalidArgument(
            "target gain must be at least 0 dB".into(),
        ));
    }
    let kappa = circuit.total_decay_rate();
    let root_g = crate::consts::db_to_ratio(gain_db).sqrt();
    let eps_sq =
        0.25 * kappa * kappa - circuit.external_coupling_rate * kappa / (2.0 * (1.0 + root_g));
    if eps_sq < 0.0 {
        return Err(Error::NoSolution(format!(
            "center gain {gain_db:.2} dB is below what the undriven mismatch already reflects; no parametric drive realizes it"
        )));
    }
    Ok(eps_sq.sqrt())
}

/// Find the per-tone power that realizes `target_gain_db` at the tone center
/// with a dressed (zero-detuned) symmetric drive.
///
/// Outer bisection in log-power around [`dressed_drive`]; pump instability or
/// threshold crossing during a trial is treated as "gain above target".
pub fn drive_for_target_gain(
    circuit: &DerivedCircuit,
    pump_offset: f64,
    target_gain_db: f64,
    phase1: f64,
    phase2: f64,
) -> Result<OperatingPoint> {
    if !(0.0..=60.0).contains(&target_gain_db) {
        return Err(Error::InvalidArgument(
            "target gain must lie between 0 and 60 dB".into(),
        ));
    }
    let attempt = |p: f64| -> Result<OperatingPoint> {
        dressed_drive(circuit, pump_offset, p, phase1, phase2)
    };
    let solver_overshoot = |e: &Error| {
        matches!(
            e,
            Error::PumpUnstable { .. } | Error::DivergentGain { .. } | Error::NoSolution(_)
        )
    };

    let mut p_lo = 1e-18;
    let first = attempt(p_lo)?;
    if first.gain_db >= target_gain_db {
        return Err(Error::InvalidArgument(format!(
            "target gain {target_gain_db:.2} dB is met at 1 aW per tone; the target is below the undriven response"
        )));
    }
    let mut best = Some(first);
    // Grow until the target (or the stable range's edge) brackets the power.
    let mut p_hi = p_lo;
    let mut bracketed = false;
    for _ in 0..200 {
        let p_try_next = p_hi * 4.0;
        match attempt(p_try_next) {
            Ok(op) if op.gain_db < target_gain_db => {
                p_lo = p_try_next;
                p_hi = p_try_next;
                best = Some(op);
            }
            Ok(op) => {
                p_hi = p_try_next;
                best = Some(op);
                bracketed = true;
                break;
            }
            Err(ref e) if solver_overshoot(e) => {
                p_hi = p_try_next;
                bracketed = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if !bracketed {
        return Err(Error::RangeExhausted(format!(
            "target gain {target_gain_db:.2} dB not reached within the stable power range"
        )));
    }
    // Bisect in log power to 1e-3 dB.
    for _ in 0..200 {
        let mid = (p_lo * p_hi).sqrt();
        match attempt(mid) {
            Ok(op) => {
                let diff = op.gain_db - target_gain_db;
                if diff.abs() <= 1e-3 {
                    return Ok(op);
                }
                if diff < 0.0 {
                    p_lo = mid;
                } else {
                    p_hi = mid;
                }
                best = Some(op);
            }
            Err(ref e) if solver_overshoot(e) => p_hi = mid,
            Err(e) => return Err(e),
        }
        if (p_hi / p_lo) - 1.0 < 1e-12 {
            break;
        }
    }
    let op = best.ok_or_else(|| {
        Error::NoSolution("no stable operating point evaluated during the power search".into())
    })?;
    if (op.gain_db - target_gain_db).abs() <= 0.05 {
        Ok(op)
    } else {
        Err(Error::NoSolution(format!(
            "power search stalled {:.3} dB away from the {target_gain_db:.2} dB target",
            op.gain_db - target_gain_db
        )))
    }
}

/// Drive update that restores operation after the resonance moves.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RetunedDrive {
    pub operating_point: OperatingPoint,
    /// Common per-tone power change relative to the original drive (dB).
    pub power_adjustment_db: f64,
    /// Tone-center change relative to the original drive (rad/s).
    pub center_shift: f64,
}

/// Re-tune a symmetric two-tone drive after the bare resonance shifts by
/// `frequency_shift` (rad/s; negative for the usual downward pull under an
/// applied magnetic field).
///
/// The tone pair is translated with the resonance and the per-tone power
/// re-solved so the center gain matches the original operating point. The
/// caller applies the shift to the circuit via
/// [`DerivedCircuit::with_resonant_frequency`]; this function does that
/// internally from the original circuit.
pub fn retune_for_field_shift(
    circuit: &DerivedCircuit,
    original: &OperatingPoint,
    frequency_shift: f64,
) -> Result<RetunedDrive> {
    if !frequency_shift.is_finite() {
        return Err(Error::InvalidArgument("frequency shift must be finite".into()));
    }
    if frequency_shift == 0.0 {
        return Ok(RetunedDrive {
            operating_point: *original,
            power_adjustment_db: 0.0,
            center_shift: 0.0,
        });
    }
    let shifted =
        circuit.with_resonant_frequency(circuit.resonant_frequency + frequency_shift);
    let op = drive_for_target_gain(
        &shifted,
        original.drive.pump_offset(),
        original.gain_db,
        original.drive.pump1_phase,
        original.drive.pump2_phase,
    )?;
    let power_adjustment_db =
        10.0 * (op.drive.pump1_power / original.drive.pump1_power).log10();
    Ok(RetunedDrive {
        center_shift: op.drive.center_frequency() - original.drive.center_frequency(),
        operating_point: op,
        power_adjustment_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::tests::reference_spec;
    use crate::circuit::{derive_circuit, DerivedCircuit};
    use crate::consts::{dbm_to_watts, watts_to_dbm, TWO_PI};

    fn reference_circuit() -> DerivedCircuit {
        derive_circuit(&reference_spec()).unwrap()
    }

    fn lossless_circuit() -> DerivedCircuit {
        let mut spec = reference_spec();
        spec.circuit.intrinsic_loss_rate = 0.0;
        derive_circuit(&spec).unwrap()
    }

    /// Half-separation used throughout: tones at ω_c ± 2π·133.5 MHz.
    const OFFSET: f64 = TWO_PI * 133.5e6;

    #[test]
    fn reflection_dip_depth_matches_coupling_ratio() {
        let c = reference_circuit();
        let s11 = reflection_coefficient(&c, c.resonant_frequency);
        // On resonance: 1 − 2κ_ext/κ = (κ_int − κ_ext)/κ, purely real.
        let expected = (c.intrinsic_loss_rate - c.external_coupling_rate) / c.total_decay_rate();
        assert!((s11.re - expected).abs() < 1e-12);
        assert!(s11.im.abs() < 1e-12);
        // Extinction for this coupling ratio, frozen: 0.5674590591 dB.
        let extinction = -10.0 * s11.norm_sqr().log10();
        assert!((extinction - 0.5674590591).abs() < 1e-8);
    }

    #[test]
    fn reflection_far_from_resonance_is_unity() {
        let c = reference_circuit();
        let s11 = reflection_coefficient(&c, c.resonant_frequency + 1000.0 * c.total_decay_rate());
        assert!((s11.norm() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn zero_power_pump_state_is_empty() {
        let c = reference_circuit();
        let drive = DriveConfig::symmetric(c.resonant_frequency, OFFSET, 0.0, 0.0, 0.0);
        let s = pump_steady_state(&c, &drive).unwrap();
        assert_eq!(s.photons_b, 0.0);
        assert_eq!(s.photons_c, 0.0);
        assert_eq!(s.parametric_strength.norm(), 0.0);
        assert!(s.stable);
        assert!(s.rwa_separation_ok);
        assert!((s.effective_detuning - (c.resonant_frequency - s.center_frequency)).abs() < 1e-9);
    }

    #[test]
    fn weak_drive_matches_linear_cavity_response() {
        let c = reference_circuit();
        let power = 1e-22; // ~1e-8 photons: Kerr pull below the 1e-9 tolerance
        let drive = DriveConfig::symmetric(c.resonant_frequency, OFFSET, power, 0.3, -0.7);
        let s = pump_steady_state(&c, &drive).unwrap();
        let kappa = c.total_decay_rate();
        let a1 = C64::from_polar(
            (power / (HBAR * drive.pump1_frequency)).sqrt(),
            drive.pump1_phase,
        );
        let expected =
            c.external_coupling_rate.sqrt() * a1
                / C64::new(0.5 * kappa, c.resonant_frequency - drive.pump1_frequency);
        assert!((s.amplitude_b - expected).norm() / expected.norm() < 1e-9);
    }

    #[test]
    fn rwa_flag_trips_on_wide_separation() {
        let c = reference_circuit();
        let drive = DriveConfig::symmetric(c.resonant_frequency, TWO_PI * 0.5e9, 0.0, 0.0, 0.0);
        let s = pump_steady_state(&c, &drive).unwrap();
        assert!(!s.rwa_separation_ok); // 1 GHz separation on a 7.45 GHz carrier
    }

    #[test]
    fn bare_centering_caps_gain_while_dressed_centering_amplifies() {
        let c = reference_circuit();
        let power = dbm_to_watts(-99.2882); // the 26 dB dressed-point drive
        // Tones centered on the bare resonance: the Kerr pull forces
        // Δ = K(n_B+n_C) ≥ 2|ε|, so the drive stays below threshold and the
        // gain stays small at any power.
        let bare = DriveConfig::symmetric(c.resonant_frequency, OFFSET, power, 0.0, 0.0);
        let s_bare = pump_steady_state(&c, &bare).unwrap();
        assert!(s_bare.effective_detuning >= 2.0 * s_bare.parametric_strength.norm() * 0.999);
        let g_bare = center_gain_db(&c, &s_bare).unwrap();
        assert!(g_bare < 3.0, "bare-centered gain {g_bare:.2} dB");
        // The same per-tone power centered on the dressed resonance: > 20 dB.
        let op = dressed_drive(&c, OFFSET, power, 0.0, 0.0).unwrap();
        assert!(op.pump.effective_detuning.abs() < 1e-6 * c.total_decay_rate());
        assert!(op.gain_db > 20.0, "dressed-centered gain {:.2} dB", op.gain_db);
    }

    #[test]
    fn twenty_six_db_operating_point_regression() {
        // Frozen against an independent steady-state solve (per-tone cubics
        // + bisection on the drive power): a 26 dB center gain at ±133.5 MHz
        // tones needs −99.2882 dBm per tone, with asymmetric intracavity
        // populations (the lower tone holds more photons) and a +57.586 MHz
        // dressed-center shift.
        let c = reference_circuit();
        let op = drive_for_target_gain(&c, OFFSET, 26.0, 0.0, 0.0).unwrap();
        assert!((op.gain_db - 26.0).abs() < 2e-3);
        let dbm = watts_to_dbm(op.drive.pump1_power);
        assert!((dbm + 99.2882).abs() < 0.01, "per-tone power {dbm:.4} dBm");
        assert!((op.pump.photons_b - 15.314097).abs() / 15.314097 < 0.005);
        assert!((op.pump.photons_c - 9.692102).abs() / 9.692102 < 0.005);
        assert!(op.pump.photons_b > op.pump.photons_c);
        let ratio = op.pump.threshold_ratio(&c);
        assert!((ratio - 0.952662).abs() < 0.005, "threshold ratio {ratio:.6}");
        let shift_mhz = (op.drive.center_frequency() - c.resonant_frequency) / TWO_PI / 1e6;
        assert!((shift_mhz - 57.586).abs() / 57.586 < 0.005, "center shift {shift_mhz:.3} MHz");
        assert_eq!(op.drive.pump1_power, op.drive.pump2_power);
    }

    #[test]
    fn epsilon_for_gain_closed_form() {
        // Lossless 26 dB: |ε|/(κ/2) = 0.9510765258 (frozen).
        let c = lossless_circuit();
        let eps = epsilon_for_center_gain(&c, 26.0).unwrap();
        let x = eps / (0.5 * c.total_decay_rate());
        assert!((x - 0.9510765258).abs() < 1e-9);
        // Consistency: constructing a pump state with exactly this ε gives
        // 26.000 dB center gain.
        let pump = PumpState {
            amplitude_b: C64::new(1.0, 0.0),
            amplitude_c: C64::new(1.0, 0.0),
            photons_b: 1.0,
            photons_c: 1.0,
            parametric_strength: C64::new(eps, 0.0),
            cross_kerr_shift: 0.0,
            effective_detuning: 0.0,
            center_frequency: c.resonant_frequency,
            stable: true,
            rwa_separation_ok: true,
            iterations: 0,
        };
        let g = center_gain_db(&c, &pump).unwrap();
        assert!((g - 26.0).abs() < 1e-9);
    }

    #[test]
    fn lossless_scattering_conserves_photon_number() {
        let c = lossless_circuit();
        let kappa = c.total_decay_rate();
        // Zero-detuned high-gain point AND a strongly detuned one: the
        // |g_s|² − |g_i|² = 1 identity holds for any Δ below threshold.
        for detuning in [0.0, 0.37 * kappa, -1.2 * kappa] {
            let eps = 0.8 * oscillation_threshold(&c, detuning);
            let pump = PumpState {
                amplitude_b: C64::new(1.0, 0.0),
                amplitude_c: C64::new(1.0, 0.0),
                photons_b: 1.0,
                photons_c: 1.0,
                parametric_strength: C64::from_polar(eps, 0.4),
                cross_kerr_shift: 0.0,
                effective_detuning: detuning,
                center_frequency: c.resonant_frequency,
                stable: true,
                rwa_separation_ok: true,
                iterations: 0,
            };
            for i in 0..501 {
                let d = -2.0 * kappa + 4.0 * kappa * i as f64 / 500.0;
                let sc = scattering_coefficients(&c, &pump, d).unwrap();
                let sum = sc.signal.norm_sqr() - sc.idler.norm_sqr();
                assert!(
                    (sum - 1.0).abs() < 1e-9,
                    "unitarity violated by {:.3e} at δ = {:.3e}, Δ = {:.3e}",
                    sum - 1.0,
                    d,
                    detuning
                );
            }
        }
    }

    #[test]
    fn scattering_reduces_to_linear_reflection_without_pumps() {
        let c = reference_circuit();
        let drive = DriveConfig::symmetric(c.resonant_frequency, OFFSET, 0.0, 0.0, 0.0);
        let pump = pump_steady_state(&c, &drive).unwrap();
        for delta in [-0.8e8, -1.3e7, 0.0, 4.2e7, 2.9e8] {
            let sc = scattering_coefficients(&c, &pump, delta).unwrap();
            let s11 = reflection_coefficient(&c, pump.center_frequency + delta);
            assert!((sc.signal - s11).norm() < 1e-12);
            assert_eq!(sc.idler.norm(), 0.0);
        }
    }

    #[test]
    fn gain_spectrum_default_grid_and_validation() {
        let c = reference_circuit();
        let op = drive_for_target_gain(&c, OFFSET, 20.0, 0.0, 0.0).unwrap();
        let spec = gain_spectrum(&c, &op.pump, &[]).unwrap();
        assert_eq!(spec.frequencies.len(), 2001);
        assert_eq!(spec.signal.len(), 2001);
        // Peak sits at the center for the dressed drive.
        let peak = spec.gain_db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let center = spec.gain_db[1000];
        assert!((peak - center).abs() < 1e-6);
        assert!((center - 20.0).abs() < 0.01);
        // Out-of-band offsets are rejected.
        let err = gain_spectrum(&c, &op.pump, &[6.0 * c.total_decay_rate()]).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn above_threshold_pump_is_rejected_by_scattering() {
        let c = reference_circuit();
        let pump = PumpState {
            amplitude_b: C64::new(3.0, 0.0),
            amplitude_c: C64::new(3.0, 0.0),
            photons_b: 9.0,
            photons_c: 9.0,
            parametric_strength: C64::new(1.01 * oscillation_threshold(&c, 0.0), 0.0),
            cross_kerr_shift: 0.0,
            effective_detuning: 0.0,
            center_frequency: c.resonant_frequency,
            stable: true,
            rwa_separation_ok: true,
            iterations: 0,
        };
        let err = scattering_coefficients(&c, &pump, 0.0).unwrap_err();
        assert!(matches!(err, Error::DivergentGain { .. }));
    }

    #[test]
    fn bandwidth_shrinks_with_gain_and_matches_frozen_value() {
        let c = reference_circuit();
        let op24 = drive_for_target_gain(&c, OFFSET, 24.0, 0.0, 0.0).unwrap();
        let bw24 = half_power_bandwidth(&c, &op24.pump).unwrap();
        // Frozen: 3.498788 MHz full width at 24 dB.
        assert!(
            ((bw24 / TWO_PI) / 1e6 - 3.498788).abs() < 0.02,
            "24 dB bandwidth {:.4} MHz",
            bw24 / TWO_PI / 1e6
        );
        let op30 = drive_for_target_gain(&c, OFFSET, 30.0, 0.0, 0.0).unwrap();
        let bw30 = half_power_bandwidth(&c, &op30.pump).unwrap();
        assert!(bw30 < bw24);
        // Gain–bandwidth products (frozen): 55.452 MHz at 24 dB rising to
        // 56.176 MHz at 30 dB, approaching the κ_ext/2π = 57.0375 MHz
        // asymptote from below.
        let gbw24 = crate::consts::db_to_ratio(op24.gain_db).sqrt() * bw24 / TWO_PI / 1e6;
        let gbw30 = crate::consts::db_to_ratio(op30.gain_db).sqrt() * bw30 / TWO_PI / 1e6;
        assert!((gbw24 - 55.452).abs() / 55.452 < 0.005, "GBW(24) {gbw24:.4} MHz");
        assert!((gbw30 - 56.176).abs() / 56.176 < 0.005, "GBW(30) {gbw30:.4} MHz");
        assert!(gbw24 < gbw30);
        assert!(gbw30 < c.external_coupling_rate / TWO_PI / 1e6);
    }

    #[test]
    fn phase_sweep_periodicity_and_squeezing_product() {
        let c = lossless_circuit();
        let op = drive_for_target_gain(&c, OFFSET, 20.0, 0.3, -0.4).unwrap();
        let n = 721;
        let phases: Vec<f64> = (0..n).map(|i| TWO_PI * i as f64 / (n - 1) as f64).collect();
        let sweep = phase_sensitive_gain(&c, &op.pump, &phases).unwrap();
        assert!(!sweep.no_parametric_drive);
        // Period π in the input phase (i and i+360 are exactly π apart).
        let half = (n - 1) / 2;
        for i in 0..=half {
            assert!(
                (sweep.gain_db[i] - sweep.gain_db[i + half]).abs() < 1e-9,
                "phase periodicity broken at index {i}"
            );
        }
        // Sample the exact extrema by aligning phases with the amplified
        // quadrature: coherent addition at Δφ = 0, cancellation at Δφ = π/2.
        let sc = scattering_coefficients(&c, &op.pump, 0.0).unwrap();
        let axis = 0.5 * (sc.idler.arg() - sc.signal.arg());
        let aligned: Vec<f64> = (0..4).map(|i| axis + 0.25 * std::f64::consts::PI * i as f64).collect();
        let extrema = phase_sensitive_gain(&c, &op.pump, &aligned).unwrap();
        // Lossless: amplified and squeezed quadratures multiply to unity.
        let product_db = extrema.max_gain_db + extrema.min_gain_db;
        assert!(product_db.abs() < 1e-6, "G_max·G_min off unity by {product_db:.2e} dB");
        // Axis-aligned input lands on the amplified quadrature.
        assert!((extrema.gain_db[0] - extrema.max_gain_db).abs() < 1e-9);
        assert!((extrema.relative_phases[0]).abs() < 1e-12);
        // Max gain exceeds the phase-preserving gain by ~6 dB (coherent
        // addition of the signal and idler paths at high gain).
        assert!((extrema.max_gain_db - (op.gain_db + 6.0)).abs() < 0.1);
    }

    #[test]
    fn pump_phase_rotates_the_amplified_quadrature() {
        let c = reference_circuit();
        let power = dbm_to_watts(-103.0);
        let op_a = dressed_drive(&c, OFFSET, power, 0.0, 0.0).unwrap();
        let op_b = dressed_drive(&c, OFFSET, power, 1.0, 0.0).unwrap();
        // arg(ε) advances with the pump-phase sum; the squeezing axis moves
        // by half of it (wrap-safe comparison).
        let d_eps = (op_b.pump.parametric_strength.arg()
            - op_a.pump.parametric_strength.arg())
        .rem_euclid(TWO_PI);
        assert!((0.5 * d_eps - 0.5).abs() < 1e-6, "axis moved by {}", 0.5 * d_eps);
        // A 2π shift of one pump phase returns the same response.
        let op_c = dressed_drive(&c, OFFSET, power, TWO_PI, 0.0).unwrap();
        let phases: Vec<f64> = (0..9).map(|i| 0.35 * i as f64).collect();
        let sweep_a = phase_sensitive_gain(&c, &op_a.pump, &phases).unwrap();
        let sweep_c = phase_sensitive_gain(&c, &op_c.pump, &phases).unwrap();
        for (ga, gc) in sweep_a.gain_db.iter().zip(&sweep_c.gain_db) {
            assert!((ga - gc).abs() < 1e-6);
        }
    }

    #[test]
    fn unpumped_phase_sweep_is_flat_and_flagged() {
        let c = reference_circuit();
        let drive = DriveConfig::symmetric(c.resonant_frequency, OFFSET, 0.0, 0.0, 0.0);
        let pump = pump_steady_state(&c, &drive).unwrap();
        let sweep = phase_sensitive_gain(&c, &pump, &[0.0, 0.5, 1.0]).unwrap();
        assert!(sweep.no_parametric_drive);
        assert!((sweep.max_gain_db - sweep.min_gain_db).abs() < 1e-12);
    }

    #[test]
    fn added_noise_lossless_approaches_half_quantum() {
        let c = lossless_circuit();
        let op = drive_for_target_gain(&c, OFFSET, 26.0, 0.0, 0.0).unwrap();
        let n = ideal_added_noise(&c, &op.pump, 0.0).unwrap();
        // Frozen: (1 − 1/G)/2 at exactly 26 dB = 0.498744056784 quanta.
        assert!((n.added_quanta - 0.498744056784).abs() < 2e-5);
        assert!(n.excess_quanta.abs() < 1e-9);
        assert!(n.added_quanta < 0.5);
    }

    #[test]
    fn internal_loss_adds_noise_above_the_lossless_bound() {
        let c = reference_circuit();
        let op = drive_for_target_gain(&c, OFFSET, 26.0, 0.0, 0.0).unwrap();
        let n = ideal_added_noise(&c, &op.pump, 0.0).unwrap();
        assert!(n.excess_quanta > 0.02, "excess {:.4}", n.excess_quanta);
        assert!(n.added_quanta > 0.5);
        assert!(n.added_quanta < 0.6);
    }

    #[test]
    fn compression_point_near_minus_144_dbm() {
        let c = reference_circuit();
        let op = drive_for_target_gain(&c, OFFSET, 26.0, 0.0, 0.0).unwrap();
        let cp = compression_point(&c, &op.pump).unwrap();
        assert!((cp.small_signal_gain_db - 26.0).abs() < 0.01);
        // Frozen: −144.411 dBm with ~1.359 signal photons in the cavity.
        assert!(
            (-145.0..=-143.8).contains(&cp.input_power_1db_dbm),
            "P1dB {:.2} dBm",
            cp.input_power_1db_dbm
        );
        assert!((cp.intracavity_photons_at_1db - 1.3589).abs() < 0.02);
        // The bracketing condition itself: exactly 1 dB within tolerance.
        let (g, _) = compressed_gain(&c, &op.pump, cp.input_power_1db).unwrap();
        assert!(((g - cp.small_signal_gain_db).abs() - 1.0).abs() < 2e-3);
        // More drive compresses further.
        let (g4, _) = compressed_gain(&c, &op.pump, 4.0 * cp.input_power_1db).unwrap();
        assert!(g4 < g);
    }

    #[test]
    fn retune_recovers_gain_after_field_shift() {
        let c = reference_circuit();
        let op = drive_for_target_gain(&c, OFFSET, 26.0, 0.0, 0.0).unwrap();
        let shift = -TWO_PI * 26e6;
        let rt = retune_for_field_shift(&c, &op, shift).unwrap();
        assert!((rt.operating_point.gain_db - 26.0).abs() < 0.01);
        // The tone center tracks the resonance shift almost exactly.
        assert!((rt.center_shift - shift).abs() < 0.02 * shift.abs());
        // Lower carrier → more photons per watt → slightly less power needed
        // (frozen: −0.0151 dB).
        assert!((rt.power_adjustment_db + 0.0151).abs() < 0.005, "adjustment {:.4} dB", rt.power_adjustment_db);
        // Zero shift takes the fast path and changes nothing.
        let same = retune_for_field_shift(&c, &op, 0.0).unwrap();
        assert_eq!(same.power_adjustment_db, 0.0);
        assert_eq!(same.operating_point.drive, op.drive);
    }
}
