//! Error taxonomy shared across the crate.
//!
//! Errors split into two families that the CLI maps onto exit codes:
//! domain errors (bad parameters, mismatched shapes, regimes where a formula
//! does not apply) and I/O errors (file system, malformed snapshot or CSV
//! input). [`Error::is_io`] is the discriminator.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Neighborhood spec construction rejected the radii.
    #[error("invalid neighborhood spec: {0}")]
    InvalidSpec(String),

    /// Lattice extents rejected (empty axis, too many axes, volume overflow).
    #[error("invalid lattice extents: {0}")]
    InvalidDims(String),

    /// Spec and lattice disagree on rank, or a coordinate is out of range.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A probability parameter lies outside its admissible interval.
    #[error("probability {value} outside {expected}")]
    BadProbability { value: f64, expected: &'static str },

    /// A numeric parameter failed validation.
    #[error("invalid parameter: {0}")]
    BadParameter(String),

    /// Reference-implementation guard: lattice too large for the naive oracle.
    #[error("volume {volume} exceeds oracle cap {cap}")]
    OracleCap { volume: usize, cap: usize },

    /// A formula was asked for a regime it does not cover.
    #[error("out of regime: {0}")]
    OutOfRegime(String),

    /// Regression fit rejected (too few rows or degenerate abscissae).
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// Root bracketing for the threshold search failed.
    #[error("bisection bracket not established: {0}")]
    NoBracket(String),

    /// Malformed snapshot, CSV, or config input.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors the CLI reports as I/O failures (exit code 2).
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Parse(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn io_discriminator() {
        assert!(Error::Parse("x".into()).is_io());
        assert!(Error::Io(std::io::Error::other("x")).is_io());
        assert!(!Error::BadProbability { value: 2.0, expected: "(0,1)" }.is_io());
        assert!(!Error::OracleCap { volume: 10, cap: 5 }.is_io());
    }

    #[test]
    fn messages_name_the_offender() {
        let e = Error::OracleCap { volume: 2_000_000, cap: 1_000_000 };
        assert!(e.to_string().contains("2000000"));
        let e = Error::BadProbability { value: 1.5, expected: "(0,1)" };
        assert!(e.to_string().contains("1.5"));
    }
}
