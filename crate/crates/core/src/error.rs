use thiserror::Error;

/// A single failed invariant found while validating a problem definition.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Request exceeds what the implementation supports (order too high, derivative
    /// family exhausted, ...).
    #[error("capability error: {0}")]
    Capability(String),

    /// Caller misuse: mismatched orders, wrong geometry, bad indices.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("singularity: {0}")]
    Singularity(String),

    /// A linear system that should determine the coefficients is singular or rank deficient.
    #[error("degenerate system: {0}")]
    Degeneracy(String),

    /// A solution was produced but failed its own residual check.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid problem: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
