//! Crate-wide error type, with a coarse category used by the CLI to pick
//! process exit codes (validation = 2, solver/fit = 3, I/O = 4).

use thiserror::Error;

/// Coarse failure class, stable across error variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad inputs: geometry, spec values, schemas, units, malformed files.
    Validation,
    /// A solver, search or fit could not produce a usable answer.
    Solver,
    /// Operating-system level I/O failure.
    Io,
}

impl ErrorCategory {
    /// Process exit code for this failure class (success is 0).
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorCategory::Validation => 2,
            ErrorCategory::Solver => 3,
            ErrorCategory::Io => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    // ---- validation -----------------------------------------------------
    /// Geometry that cannot carry current (e.g. width ≤ 2 × dead width).
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// Parameter set that is internally impossible (α outside (0,1], ...).
    #[error("inconsistent specification: {0}")]
    InconsistentSpec(String),

    /// A single argument out of its physical domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Structured document missing/mistyped a field.
    #[error("schema violation at `{field}`: {message}")]
    Schema { field: String, message: String },

    /// Unit string not accepted for the field's dimension.
    #[error("unit error at `{field}`: {message}")]
    Unit { field: String, message: String },

    /// Malformed text data (Touchstone, CSV); line numbers are 1-based.
    #[error("malformed {format} data at line {line}: {message}")]
    Parse {
        format: &'static str,
        line: usize,
        message: String,
    },

    /// An operation's stated precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A result record fails its invariants (e.g. checksum mismatch).
    #[error("record validation failed: {0}")]
    Record(String),

    // ---- solver / fit ---------------------------------------------------
    /// Pump steady-state iteration diverged or landed on an unstable branch.
    #[error(
        "pump steady state unstable: {message} (last iterate |B|^2 = {b_sq:.6e}, |C|^2 = {c_sq:.6e} photons)"
    )]
    PumpUnstable {
        message: String,
        b_sq: f64,
        c_sq: f64,
    },

    /// Parametric drive at or above the oscillation threshold.
    #[error(
        "parametric drive at or above oscillation threshold: |eps| = {eps:.6e} rad/s >= threshold {threshold:.6e} rad/s; linearized gain diverges"
    )]
    DivergentGain { eps: f64, threshold: f64 },

    /// A bracketing/bisection search found no admissible solution.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// Least-squares iteration exhausted without meeting tolerances.
    #[error("fit did not converge after {iterations} iterations (last chi-square {chi_square:.6e})")]
    FitDidNotConverge { iterations: usize, chi_square: f64 },

    /// Normal equations (or data) too degenerate to solve.
    #[error("ill-conditioned problem: {0}")]
    IllConditioned(String),

    /// A search range was exhausted before the target condition was met.
    #[error("search range exhausted: {0}")]
    RangeExhausted(String),

    /// A required prior calibration quantity is absent.
    #[error("missing calibration: {0}")]
    MissingCalibration(String),

    // ---- i/o -------------------------------------------------------------
    #[error("i/o failure on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Map each variant onto its exit-code category.
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            DegenerateGeometry(_) | InconsistentSpec(_) | InvalidArgument(_)
            | Schema { .. } | Unit { .. } | Parse { .. } | Precondition(_) | Record(_) => {
                ErrorCategory::Validation
            }
            PumpUnstable { .. }
            | DivergentGain { .. }
            | NoSolution(_)
            | FitDidNotConverge { .. }
            | IllConditioned(_)
            | RangeExhausted(_)
            | MissingCalibration(_) => ErrorCategory::Solver,
            Io { .. } => ErrorCategory::Io,
        }
    }

    /// Helper to wrap `std::io::Error` with the offending path.
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
