use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A column label could not be resolved, or labels collide.
    #[error("labeling error: {0}")]
    Labeling(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    /// Brute-force enumeration would exceed the configured size cap.
    #[error("oracle scale exceeded: {0}")]
    OracleScale(String),
    #[error("graph error: {0}")]
    Graph(String),
    /// A fractional partition is outside the feasible polytope.
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
    #[error("structure error: {0}")]
    Structure(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}
