use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not a prime in [2, 2^31]")]
    NotPrime(u64),
    #[error("exponent threshold must be at least 1")]
    InvalidThreshold,
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("element is a multiple of x and has no inverse")]
    NotInvertible,
    #[error("matrix is singular")]
    Singular,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("certificate does not match decomposition: {0}")]
    CertificateMismatch(String),
    #[error("unknown tensor family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameters for family `{family}`: {reason}")]
    InvalidFamilyParams { family: String, reason: String },
    #[error("border rings with H > 1 are not supported here; use the border search")]
    BorderRingUnsupported,
    #[error("operation requires 3-dimensional tensors, got {0} axes")]
    UnsupportedD(usize),
    #[error("order k = {k} outside 1..={max}")]
    UnsupportedK { k: usize, max: usize },
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
