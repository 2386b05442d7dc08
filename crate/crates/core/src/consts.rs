//! Physical constants (2019 SI exact values) and small unit helpers.
//!
//! Everything inside the crate is SI: angular frequencies and rates in rad/s,
//! inductance in H, capacitance in F, current in A, power in W, temperature
//! in K. Human-facing units (GHz, dBm, mK, ...) are converted at the I/O and
//! CLI boundaries only.

/// Reduced Planck constant ħ (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant k_B (J/K).
pub const K_B: f64 = 1.380_649e-23;

/// 2π, for cyclic ↔ angular frequency conversion.
pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Convert a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// Convert a power in watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}

/// Convert a power ratio to decibels.
pub fn ratio_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Convert decibels to a power ratio.
pub fn db_to_ratio(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
