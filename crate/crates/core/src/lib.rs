//! Modeling, simulation, and calibration for kinetic-inductance parametric
//! amplifiers.
//!
//! The device under study is a lumped-element superconducting resonator
//! whose inductance is dominated by a short nanobridge with a large kinetic
//! inductance. The bridge's current-dependent inductance,
//! L(I) ≈ L₀·[1 + (I/I*)²], makes the resonator weakly anharmonic (a Kerr
//! oscillator), and driving it with two detuned pumps produces phase-
//! preserving four-wave-mixing gain between a signal band and an idler band.
//!
//! The crate is organized as:
//!
//! * [`circuit`] — from film properties and bridge geometry to circuit
//!   parameters: inductances, participation ratio, resonant frequency,
//!   impedance, zero-point current, and the Kerr coefficient; plus inverse
//!   design of a bridge for a target Kerr coefficient.
//! * [`dynamics`] — two-pump steady state and stability, small-signal
//!   scattering (gain spectra, bandwidth, phase-sensitive operation), added
//!   noise, compression, and operating-point search/retuning.
//! * [`calibration`] — fitting measured reflection traces, Y-factor noise
//!   thermometry against a variable-temperature source, device noise
//!   extraction with uncertainty propagation, and magnetic-field sweep
//!   reduction.
//! * [`fit`] — the damped Gauss–Newton least-squares engine used by the
//!   calibration fits.
//! * [`io`] — strict readers/writers: device descriptions (JSON with
//!   explicit units), one-port Touchstone traces, CSV trace formats, and
//!   canonical JSON records with input checksums.
//! * [`synth`] — seeded synthetic data generators for tests and demos.
//! * [`consts`] — physical constants and dB/dBm helpers.
//!
//! Unit conventions: frequencies and rates are angular (rad/s) everywhere in
//! this crate's APIs; files and user-facing interfaces use cyclic units
//! (Hz-family) and are converted exactly once at the I/O boundary. The one
//! deliberate exception is detection bandwidth, which stays cyclic (Hz)
//! because it counts spectral bins. Powers are watts internally, dBm at the
//! boundary; energies are joules; the Kerr coefficient is rad/s per photon.

// Validation tests are written `!(x > 0.0)` on purpose: unlike `x <= 0.0`,
// the negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod circuit;
pub mod consts;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod io;
pub mod synth;

pub use error::{Error, ErrorCategory, Result};
