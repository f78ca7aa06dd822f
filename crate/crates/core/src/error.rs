use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("characteristic 2 is not supported (p = {p})")]
    CharacteristicTwoUnsupported { p: u64 },

    #[error("{p} is not prime")]
    NotPrime { p: u64 },

    #[error("division by zero in F_{p}")]
    DivisionByZero { p: u32 },

    #[error("instance too large: {what} needs {size} entries, cap is {cap}")]
    InstanceTooLarge { what: &'static str, size: u128, cap: u128 },

    #[error("point {coords:?} does not lie on the {variety}")]
    NotOnVariety { coords: Vec<u32>, variety: &'static str },

    #[error("operation requires a paraboloid surface, got {got}")]
    WrongVariety { got: String },

    #[error("exponent must be positive, got {0}")]
    BadExponent(f64),

    #[error("measure mismatch: {left:?} vs {right:?}")]
    MeasureMismatch { left: crate::fourier::MeasureTag, right: crate::fourier::MeasureTag },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("unsupported dimension d = {d}: {reason}")]
    UnsupportedDimension { d: usize, reason: &'static str },

    #[error("degenerate subspace: k = {k} leaves no room in dimension d = {d}")]
    DegenerateSubspace { d: usize, k: usize },

    #[error("function is identically zero")]
    EmptyFunction,

    #[error("inequality violated: {name}: lhs {lhs} > rhs {rhs}")]
    InequalityViolation { name: &'static str, lhs: f64, rhs: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
