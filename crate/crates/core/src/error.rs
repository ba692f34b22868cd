//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model construction, evaluation, and the checkers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A constructor received a parameter outside its admissible range.
    #[error("invalid parameter {name}: got {value}, requires {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    /// An evaluation was requested outside the function's domain.
    #[error("domain error: {what} requires {requirement}, got t = {t}")]
    Domain {
        what: &'static str,
        requirement: &'static str,
        t: f64,
    },

    /// Two vectors that must have equal length do not.
    #[error("length mismatch: {left} vs {right} entries")]
    LengthMismatch { left: usize, right: usize },

    /// Verdicts produced on different grids were combined.
    #[error("grid mismatch: verdicts were produced on different grids")]
    GridMismatch,

    /// A rule emitted a conclusion that its own grid validation refuted.
    /// This signals an implementation bug or a tolerance failure, never a
    /// property of the models.
    #[error("contradiction: rule {rule} concluded {conclusion} but the grid refuted it near t = {t}")]
    Contradiction {
        rule: String,
        conclusion: String,
        t: f64,
    },

    /// An iterative solver failed to reach its target.
    #[error("convergence failure in {what}: {detail}")]
    Convergence { what: &'static str, detail: String },

    /// A spec string could not be parsed; `position` is a byte offset into
    /// the original input.
    #[error("parse error at byte {position} in {input:?}: {message}")]
    Parse {
        input: String,
        position: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn parse(input: &str, position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            input: input.to_string(),
            position,
            message: message.into(),
        }
    }
}
