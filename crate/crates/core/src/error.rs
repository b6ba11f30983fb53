//! Shared error type.
//!
//! Diagnostics distinguish *structural* failures (a model that cannot be
//! interpreted) from *numerical* ones (a probe that left the declared
//! domain or produced a non-finite value). Pass/fail verdicts are never
//! errors; they live in reports.

use alloc::string::String;
use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    /// A probe point left the declared domain, or an evaluation produced
    /// a non-finite value. Probes are never clamped silently.
    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    /// Dimension or arity mismatch between numeric objects.
    #[error("shape error: expected {expected}, got {got} ({context})")]
    Shape {
        expected: usize,
        got: usize,
        context: String,
    },

    /// A model failed structural validation (unknown node, cycle,
    /// arity mismatch, missing declaration).
    #[error("validation error: {0}")]
    Validation(String),

    /// The requested computation is not defined for this model class.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// An exact computation would exceed the declared capacity cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A term or value did not match the declared sort.
    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    /// A symbol correspondence does not cover a required symbol.
    #[error("coverage error: {0}")]
    Coverage(String),

    /// A stated precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl CoreError {
    pub(crate) fn shape(expected: usize, got: usize, context: &str) -> Self {
        CoreError::Shape {
            expected,
            got,
            context: String::from(context),
        }
    }
}
