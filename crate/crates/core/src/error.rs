use thiserror::Error;

/// Errors raised by constructors and evaluators in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid group table: {0}")]
    GroupAxiom(String),

    #[error("generators do not reach element {0}")]
    Unreachable(usize),

    #[error("length function violates {0}")]
    LengthAxiom(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("stability set is not closed under composition at tol {tol:e}; try a smaller tolerance")]
    ToleranceInconsistent { tol: f64 },

    #[error("coset partition failed: {0}")]
    Coset(String),

    #[error("bridge specification error: {0}")]
    Spec(String),

    #[error("inputs come from different specifications: {0}")]
    Consistency(String),

    #[error("objective precondition failed: {0}")]
    Precondition(String),

    #[error("infeasible request: {0}")]
    Feasibility(String),
}

pub type Result<T> = std::result::Result<T, Error>;
