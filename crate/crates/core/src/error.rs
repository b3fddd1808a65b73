use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An input sits outside the domain of the requested formula.
    #[error("domain violation: {0}")]
    DomainViolation(String),

    /// An operation was invoked for an operator regime it does not apply to.
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    /// The requested level is outside the attainable range of the branch.
    #[error("level C0 = {level} unattainable: {what}")]
    Unattainable { what: String, level: f64 },

    /// The regime has no supported formula for this quantity.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The decay exponent gate `delta_0 > 2` failed.
    #[error("not admissible: delta0 = {delta0} is not > 2")]
    NotAdmissible { delta0: f64 },

    /// Bracket expansion exceeded its configured cap.
    #[error("bracket failure: {0}")]
    BracketFailure(String),

    /// Adaptive stepping or iteration could not meet its error target.
    #[error("tolerance failure: {0}")]
    ToleranceFailure(String),

    /// The Hessian spectrum was requested at the puncture.
    #[error("Hessian is undefined at the origin")]
    OriginHessian,

    /// A matrix fails the compatibility condition of the requested construction.
    #[error("incompatible matrix: {0}")]
    IncompatibleMatrix(String),

    /// Malformed or inconsistent input data.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
