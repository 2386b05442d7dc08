//! Lumped-element circuit model of a nanobridge kinetic-inductance resonator.
//!
//! A thin disordered superconducting film carries a kinetic sheet inductance
//! that grows with current, L_k(I) ≈ L_k0 [1 + (I/I*)²], where I* sets the
//! scale of the nonlinearity. Patterning a short, narrow bridge into the
//! resonator's inductor concentrates the current density there, so the bridge
//! dominates both the inductance participation and the Kerr nonlinearity.
//!
//! The resonator is modeled as the bridge inductance L_k0 in series with a
//! geometric/parasitic inductance L_par, shunted by a capacitance C and
//! coupled to a feedline with external rate κ_ext and internal loss κ_int.
//! From those ingredients this module derives the mode frequency, impedance,
//! inductance participation ratio α = L_k0 / (L_k0 + L_par), zero-point
//! current fluctuation and the vacuum Kerr coefficient
//!
//! ```text
//! K = (3/2) ħ ω₀³ α / (Z_r I*²)            (impedance form)
//! K = 6 (L_k0 / I*²) I_zpf⁴ / ħ            (zero-point-current form)
//! I_zpf = sqrt(α ħ ω₀ / (2 L_k0))
//! ```
//!
//! The two K expressions are algebraically identical (substitute
//! L_k0 = α Z_r / ω₀); both are computed and cross-checked on every
//! derivation. K is kept in angular-frequency units (rad/s) throughout.

use serde::{Deserialize, Serialize};

use crate::consts::HBAR;
use crate::error::{Error, Result};

/// Superconducting film parameters, all SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilmProperties {
    /// Kinetic sheet inductance L_sq (H per square).
    pub sheet_inductance: f64,
    /// Film thickness t (m).
    pub thickness: f64,
    /// Width lost to edge damage/oxidation on each side of a wire (m).
    pub dead_width_per_side: f64,
    /// Critical (characteristic) current density J* (A/m²); the bridge's
    /// characteristic current is I* = J* · w_eff · t.
    pub critical_current_density: f64,
}

impl FilmProperties {
    pub fn validate(&self) -> Result<()> {
        if !(self.sheet_inductance.is_finite() && self.sheet_inductance > 0.0) {
            return Err(Error::InvalidArgument(
                "film sheet_inductance must be positive and finite".into(),
            ));
        }
        if !(self.thickness.is_finite() && self.thickness > 0.0) {
            return Err(Error::InvalidArgument(
                "film thickness must be positive and finite".into(),
            ));
        }
        if !(self.dead_width_per_side.is_finite() && self.dead_width_per_side >= 0.0) {
            return Err(Error::InvalidArgument(
                "film dead_width_per_side must be non-negative and finite".into(),
            ));
        }
        if !(self.critical_current_density.is_finite() && self.critical_current_density > 0.0) {
            return Err(Error::InvalidArgument(
                "film critical_current_density must be positive and finite".into(),
            ));
        }
        Ok(())
    }
}

/// Drawn dimensions of the nanobridge constriction (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NanobridgeGeometry {
    /// Drawn (lithographic) width (m).
    pub width: f64,
    /// Bridge length along the current direction (m).
    pub length: f64,
}

impl NanobridgeGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::InvalidArgument(
                "bridge width must be positive and finite".into(),
            ));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidArgument(
                "bridge length must be positive and finite".into(),
            ));
        }
        Ok(())
    }
}

/// Linear lumped elements around the bridge, all SI (rates in rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LumpedCircuit {
    /// Shunt capacitance C (F).
    pub shunt_capacitance: f64,
    /// Series inductance not contributed by the bridge (H).
    pub parasitic_inductance: f64,
    /// External (feedline) coupling rate κ_ext (rad/s).
    pub external_coupling_rate: f64,
    /// Internal loss rate κ_int (rad/s).
    pub intrinsic_loss_rate: f64,
}

impl LumpedCircuit {
    pub fn validate(&self) -> Result<()> {
        if !(self.shunt_capacitance.is_finite() && self.shunt_capacitance > 0.0) {
            return Err(Error::InvalidArgument(
                "shunt_capacitance must be positive and finite".into(),
            ));
        }
        if !(self.parasitic_inductance.is_finite() && self.parasitic_inductance >= 0.0) {
            return Err(Error::InvalidArgument(
                "parasitic_inductance must be non-negative and finite".into(),
            ));
        }
        if !(self.external_coupling_rate.is_finite() && self.external_coupling_rate > 0.0) {
            return Err(Error::InvalidArgument(
                "external_coupling_rate must be positive and finite".into(),
            ));
        }
        if !(self.intrinsic_loss_rate.is_finite() && self.intrinsic_loss_rate >= 0.0) {
            return Err(Error::InvalidArgument(
                "intrinsic_loss_rate must be non-negative and finite".into(),
            ));
        }
        Ok(())
    }
}

/// Independently reported device parameters (e.g. from a datasheet or a
/// measurement round), used for cross-checks against the geometric derivation.
/// All optional; frequencies/rates in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StatedParameters {
    pub resonant_frequency: Option<f64>,
    pub participation_ratio: Option<f64>,
    pub impedance: Option<f64>,
    pub characteristic_current: Option<f64>,
    /// An externally reported Kerr coefficient to compare against (rad/s).
    pub reported_kerr_coefficient: Option<f64>,
}

/// Complete device description: film + bridge geometry + linear circuit,
/// optionally accompanied by independently stated parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub film: FilmProperties,
    pub geometry: NanobridgeGeometry,
    pub circuit: LumpedCircuit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stated: Option<StatedParameters>,
}

impl DeviceSpec {
    pub fn validate(&self) -> Result<()> {
        self.film.validate()?;
        self.geometry.validate()?;
        self.circuit.validate()
    }
}

/// Where the participation ratio comes from when deriving the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaSource {
    /// α = L_k0 / (L_k0 + L_par) from the inductance split (default).
    FromInductances,
    /// α taken from `DeviceSpec::stated`; the total inductance is then
    /// L_k0 / α and the implied parasitic replaces the file value.
    Stated,
}

/// Resonator quantities derived from a [`DeviceSpec`], all SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedCircuit {
    /// Current-carrying bridge width after edge-damage subtraction (m).
    pub effective_width: f64,
    /// Bridge kinetic inductance L_k0 (H).
    pub bridge_inductance: f64,
    /// L_k0 + parasitic (H).
    pub total_inductance: f64,
    /// Inductance participation ratio α ∈ (0, 1].
    pub participation_ratio: f64,
    /// Resonator impedance Z_r = sqrt(L_tot / C) (Ω).
    pub impedance: f64,
    /// Mode frequency ω₀ = 1/sqrt(L_tot C) (rad/s).
    pub resonant_frequency: f64,
    /// Zero-point current fluctuation through the bridge (A).
    pub zero_point_current: f64,
    /// Characteristic current I* = J* · w_eff · t (A).
    pub characteristic_current: f64,
    /// Vacuum Kerr coefficient K (rad/s), impedance form.
    pub kerr_coefficient: f64,
    /// K recomputed through the zero-point-current form (rad/s); agreement
    /// with `kerr_coefficient` is a structural self-check.
    pub kerr_cross_check: f64,
    /// External coupling rate κ_ext (rad/s), carried from the input circuit.
    pub external_coupling_rate: f64,
    /// Internal loss rate κ_int (rad/s), carried from the input circuit.
    pub intrinsic_loss_rate: f64,
}

impl DerivedCircuit {
    /// Total decay rate κ_tot = κ_ext + κ_int (rad/s).
    pub fn total_decay_rate(&self) -> f64 {
        self.external_coupling_rate + self.intrinsic_loss_rate
    }

    /// Relative disagreement between the two Kerr-coefficient forms.
    pub fn kerr_consistency_error(&self) -> f64 {
        (self.kerr_coefficient - self.kerr_cross_check).abs() / self.kerr_coefficient.abs()
    }

    /// Copy with the resonant frequency replaced (perturbative shift, e.g.
    /// from an applied magnetic field); all other quantities are held.
    pub fn with_resonant_frequency(&self, omega0: f64) -> Self {
        let mut c = *self;
        c.resonant_frequency = omega0;
        c
    }
}

/// Current-carrying width of a wire: drawn width minus the damaged edges.
///
/// Errors when the drawn width does not exceed twice the per-side dead width.
pub fn effective_width(film: &FilmProperties, geometry: &NanobridgeGeometry) -> Result<f64> {
    film.validate()?;
    geometry.validate()?;
    let w_eff = geometry.width - 2.0 * film.dead_width_per_side;
    if w_eff <= 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "drawn width {:.3e} m does not exceed twice the dead width ({:.3e} m per side); no current-carrying cross-section remains",
            geometry.width, film.dead_width_per_side
        )));
    }
    Ok(w_eff)
}

/// Bridge kinetic inductance L_k0 = L_sq · length / effective width (H).
pub fn bridge_inductance(film: &FilmProperties, geometry: &NanobridgeGeometry) -> Result<f64> {
    let w_eff = effective_width(film, geometry)?;
    Ok(film.sheet_inductance * geometry.length / w_eff)
}

/// Characteristic current of the bridge, I* = J* · w_eff · t (A).
pub fn characteristic_current(
    film: &FilmProperties,
    geometry: &NanobridgeGeometry,
) -> Result<f64> {
    let w_eff = effective_width(film, geometry)?;
    Ok(film.critical_current_density * w_eff * film.thickness)
}

/// Vacuum Kerr coefficient from mode parameters (rad/s):
/// K = (3/2) ħ ω³ α / (Z I*²).
pub fn kerr_from_impedance(omega0: f64, alpha: f64, impedance: f64, i_star: f64) -> f64 {
    1.5 * HBAR * omega0.powi(3) * alpha / (impedance * i_star * i_star)
}

/// Vacuum Kerr coefficient from the zero-point current (rad/s):
/// K = 6 (L_k0 / I*²) I_zpf⁴ / ħ. The energy-unit form is normalized by ħ
/// here so that both evaluators share angular-frequency units.
pub fn kerr_from_zero_point_current(bridge_inductance: f64, i_star: f64, i_zpf: f64) -> f64 {
    6.0 * (bridge_inductance / (i_star * i_star)) * i_zpf.powi(4) / HBAR
}

/// Relative tolerance for the structural agreement of the two K forms.
const KERR_CONSISTENCY_TOL: f64 = 1e-9;

/// Derive all resonator quantities from a device spec, taking
/// α = L_k0 / (L_k0 + L_par).
pub fn derive_circuit(spec: &DeviceSpec) -> Result<DerivedCircuit> {
    derive_circuit_with(spec, AlphaSource::FromInductances)
}

/// Derive all resonator quantities, selecting where α comes from.
pub fn derive_circuit_with(spec: &DeviceSpec, alpha_source: AlphaSource) -> Result<DerivedCircuit> {
    spec.validate()?;
    let w_eff = effective_width(&spec.film, &spec.geometry)?;
    let l_bridge = bridge_inductance(&spec.film, &spec.geometry)?;
    let i_star = characteristic_current(&spec.film, &spec.geometry)?;

    let (alpha, l_total) = match alpha_source {
        AlphaSource::FromInductances => {
            let l_total = l_bridge + spec.circuit.parasitic_inductance;
            (l_bridge / l_total, l_total)
        }
        AlphaSource::Stated => {
            let alpha = spec
                .stated
                .and_then(|s| s.participation_ratio)
                .ok_or_else(|| {
                    Error::InconsistentSpec(
                        "alpha requested from stated parameters, but none is present".into(),
                    )
                })?;
            if !(alpha.is_finite() && alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::InconsistentSpec(format!(
                    "stated participation ratio {alpha} outside (0, 1]"
                )));
            }
            (alpha, l_bridge / alpha)
        }
    };
    if !(alpha.is_finite() && alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InconsistentSpec(format!(
            "participation ratio {alpha} outside (0, 1]"
        )));
    }

    let c = spec.circuit.shunt_capacitance;
    let omega0 = 1.0 / (l_total * c).sqrt();
    let impedance = (l_total / c).sqrt();
    let i_zpf = (alpha * HBAR * omega0 / (2.0 * l_bridge)).sqrt();

    let kerr = kerr_from_impedance(omega0, alpha, impedance, i_star);
    let kerr_cross = kerr_from_zero_point_current(l_bridge, i_star, i_zpf);
    if !kerr.is_finite() || kerr <= 0.0 {
        return Err(Error::InconsistentSpec(format!(
            "derived Kerr coefficient {kerr:.6e} rad/s is not positive and finite"
        )));
    }
    let rel = (kerr - kerr_cross).abs() / kerr;
    if rel > KERR_CONSISTENCY_TOL {
        // Mathematically impossible for valid inputs; guards overflow/NaN paths.
        return Err(Error::InconsistentSpec(format!(
            "Kerr evaluators disagree by a relative {rel:.3e}; inputs are numerically degenerate"
        )));
    }

    Ok(DerivedCircuit {
        effective_width: w_eff,
        bridge_inductance: l_bridge,
        total_inductance: l_total,
        participation_ratio: alpha,
        impedance,
        resonant_frequency: omega0,
        zero_point_current: i_zpf,
        characteristic_current: i_star,
        kerr_coefficient: kerr,
        kerr_cross_check: kerr_cross,
        external_coupling_rate: spec.circuit.external_coupling_rate,
        intrinsic_loss_rate: spec.circuit.intrinsic_loss_rate,
    })
}

/// Derivation report: the selected circuit plus cross-checks against any
/// independently stated parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeriveReport {
    pub derived: DerivedCircuit,
    /// α from the inductance split (always computed).
    pub alpha_from_inductances: f64,
    /// α from the device file's `stated` block, if present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_stated: Option<f64>,
    /// K from the impedance form evaluated at the *stated* (ω, α, Z, I*),
    /// when all four are present (rad/s).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kerr_from_stated: Option<f64>,
    /// Externally reported K, if present (rad/s).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reported_kerr: Option<f64>,
    /// kerr_from_stated / reported_kerr, when both exist.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kerr_mismatch_factor: Option<f64>,
    /// Human-readable consistency findings.
    pub notes: Vec<String>,
}

/// Stated-vs-derived mismatch level that triggers a note.
const ALPHA_NOTE_TOL: f64 = 0.01;
/// Reported-vs-computed Kerr factor beyond which the parameter set is flagged
/// as internally inconsistent.
const KERR_FLAG_FACTOR: f64 = 2.0;

/// Derive the circuit and cross-check it against the stated parameters.
pub fn derive_report(spec: &DeviceSpec, alpha_source: AlphaSource) -> Result<DeriveReport> {
    let derived = derive_circuit_with(spec, alpha_source)?;
    let geometric = derive_circuit_with(spec, AlphaSource::FromInductances)?;
    let mut notes = Vec::new();

    let alpha_stated = spec.stated.and_then(|s| s.participation_ratio);
    if let Some(a_stated) = alpha_stated {
        let rel = (a_stated - geometric.participation_ratio).abs() / a_stated;
        if rel > ALPHA_NOTE_TOL {
            notes.push(format!(
                "participation ratio from inductances ({:.4}) and stated value ({:.4}) disagree by {:.1}%; both are reported, `--alpha-from` selects which one drives the derivation",
                geometric.participation_ratio,
                a_stated,
                100.0 * rel
            ));
        }
    }

    let kerr_from_stated = spec.stated.and_then(|s| {
        match (
            s.resonant_frequency,
            s.participation_ratio,
            s.impedance,
            s.characteristic_current,
        ) {
            (Some(w), Some(a), Some(z), Some(i)) => Some(kerr_from_impedance(w, a, z, i)),
            _ => None,
        }
    });
    let reported_kerr = spec.stated.and_then(|s| s.reported_kerr_coefficient);
    let kerr_mismatch_factor = match (kerr_from_stated, reported_kerr) {
        (Some(k), Some(r)) if r > 0.0 => Some(k / r),
        _ => None,
    };
    if let Some(f) = kerr_mismatch_factor {
        if !(1.0 / KERR_FLAG_FACTOR..=KERR_FLAG_FACTOR).contains(&f) {
            notes.push(format!(
                "INCONSISTENT: Kerr coefficient computed from the stated parameters ({:.4e} rad/s = {:.4} MHz cyclic) differs from the reported value ({:.4e} rad/s = {:.4} MHz cyclic) by a factor of {:.1}; the stated parameter set does not support the reported nonlinearity",
                kerr_from_stated.unwrap(),
                kerr_from_stated.unwrap() / crate::consts::TWO_PI / 1e6,
                reported_kerr.unwrap(),
                reported_kerr.unwrap() / crate::consts::TWO_PI / 1e6,
                f
            ));
        }
    }

    Ok(DeriveReport {
        derived,
        alpha_from_inductances: geometric.participation_ratio,
        alpha_stated,
        kerr_from_stated,
        reported_kerr,
        kerr_mismatch_factor,
        notes,
    })
}

/// Fixed linear elements and admissible width window for a bridge design.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DesignConstraints {
    /// Shunt capacitance C (F).
    pub shunt_capacitance: f64,
    /// Non-bridge series inductance (H).
    pub parasitic_inductance: f64,
    /// Smallest drawn width the process can make (m).
    pub min_width: f64,
    /// Largest drawn width worth considering (m).
    pub max_width: f64,
}

/// Invert the design: find the bridge geometry that realizes `target_kerr`
/// (rad/s) at `target_frequency` (rad/s) for the given film and constraints.
///
/// The frequency constraint pins the total inductance L_tot = 1/(ω²C), hence
/// L_k0 = L_tot − L_par and, for each candidate width, the length
/// l = L_k0 · w_eff / L_sq. K then falls monotonically with width through
/// I* ∝ w_eff, so a bisection on width solves the target. Errors with the
/// achievable [K_min, K_max] bracket when the target lies outside it.
pub fn design_bridge_for_kerr(
    film: &FilmProperties,
    constraints: &DesignConstraints,
    target_kerr: f64,
    target_frequency: f64,
) -> Result<NanobridgeGeometry> {
    film.validate()?;
    if !(target_kerr.is_finite() && target_kerr > 0.0) {
        return Err(Error::InvalidArgument(
            "target Kerr coefficient must be positive and finite".into(),
        ));
    }
    if !(target_frequency.is_finite() && target_frequency > 0.0) {
        return Err(Error::InvalidArgument(
            "target frequency must be positive and finite".into(),
        ));
    }
    let c = constraints.shunt_capacitance;
    let l_par = constraints.parasitic_inductance;
    if !(c.is_finite() && c > 0.0) || !(l_par.is_finite() && l_par >= 0.0) {
        return Err(Error::InvalidArgument(
            "design constraints must have positive capacitance and non-negative parasitic inductance".into(),
        ));
    }
    let min_w_eff = constraints.min_width - 2.0 * film.dead_width_per_side;
    if min_w_eff <= 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "min_width {:.3e} m does not exceed twice the dead width ({:.3e} m per side)",
            constraints.min_width, film.dead_width_per_side
        )));
    }
    if constraints.max_width <= constraints.min_width {
        return Err(Error::InvalidArgument(
            "max_width must exceed min_width".into(),
        ));
    }

    let l_total = 1.0 / (target_frequency * target_frequency * c);
    let l_bridge = l_total - l_par;
    if l_bridge <= 0.0 {
        return Err(Error::InconsistentSpec(format!(
            "parasitic inductance {:.4e} H leaves no room for the bridge: the frequency target requires a total of {:.4e} H",
            l_par, l_total
        )));
    }
    let alpha = l_bridge / l_total;
    let impedance = (l_total / c).sqrt();

    let kerr_at = |width: f64| -> f64 {
        let w_eff = width - 2.0 * film.dead_width_per_side;
        let i_star = film.critical_current_density * w_eff * film.thickness;
        kerr_from_impedance(target_frequency, alpha, impedance, i_star)
    };

    // K is monotone decreasing in width: the achievable range is
    // [K(max_width), K(min_width)].
    let k_hi = kerr_at(constraints.min_width);
    let k_lo = kerr_at(constraints.max_width);
    if target_kerr > k_hi || target_kerr < k_lo {
        return Err(Error::NoSolution(format!(
            "target Kerr {:.4e} rad/s outside the achievable range [{:.4e}, {:.4e}] rad/s for widths [{:.3e}, {:.3e}] m",
            target_kerr, k_lo, k_hi, constraints.min_width, constraints.max_width
        )));
    }

    let (mut lo, mut hi) = (constraints.min_width, constraints.max_width);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kerr_at(mid) > target_kerr {
            lo = mid; // too narrow → K too big → widen
        } else {
            hi = mid;
        }
        if (hi - lo) / hi < 1e-15 {
            break;
        }
    }
    let width = 0.5 * (lo + hi);
    let w_eff = width - 2.0 * film.dead_width_per_side;
    let length = l_bridge * w_eff / film.sheet_inductance;
    let geometry = NanobridgeGeometry { width, length };

    // Structural check: re-deriving through the public path must land on the
    // target within 1%.
    let spec = DeviceSpec {
        film: *film,
        geometry,
        circuit: LumpedCircuit {
            shunt_capacitance: c,
            parasitic_inductance: l_par,
            external_coupling_rate: 1.0, // irrelevant to K
            intrinsic_loss_rate: 0.0,
        },
        stated: None,
    };
    let derived = derive_circuit(&spec)?;
    let rel = (derived.kerr_coefficient - target_kerr).abs() / target_kerr;
    if rel > 0.01 {
        return Err(Error::NoSolution(format!(
            "design landed {:.2}% away from the Kerr target; the width window is too coarse",
            100.0 * rel
        )));
    }
    Ok(geometry)
}
