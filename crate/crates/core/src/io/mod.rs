//! File formats and unit handling.
//!
//! Boundary convention: every frequency-like number in a file or flag is
//! cyclic (Hz family); the conversion to the crate's internal angular units
//! (rad/s) happens exactly once, inside these readers/writers. Powers may be
//! given in watt multiples or dBm, lengths in metric multiples, and every
//! dimensioned JSON field accepts either a bare number (base unit) or a
//! `{"value": x, "unit": "..."}` object.

pub mod device;
pub mod records;
pub mod touchstone;
pub mod traces;
pub mod units;
