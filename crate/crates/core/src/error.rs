use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// Variants split into configuration problems (bad dimensions, unknown
/// names, out-of-range parameters) and data problems (an input object that
/// violates one of its invariants). [`Error::is_data_violation`] tells the
/// two apart.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("modulus is not a monic irreducible polynomial of degree {degree} over GF({p})")]
    NotIrreducible { p: u32, degree: usize },
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("zero has no multiplicative inverse")]
    DivisionByZero,

    #[error("{0} is not a prime power")]
    NotPrimePower(usize),
    #[error("dimension {0} is too small (need at least 2)")]
    DimensionTooSmall(usize),
    #[error("embedding dimension {big} must exceed target dimension {dim}")]
    DimensionOrder { dim: usize, big: usize },
    #[error("tensor design needs at least one factor")]
    EmptyFactors,
    #[error("constructed bases failed validation: {0}")]
    MubValidation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("basis index {index} out of range (basis has {len} elements)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("trace preservation violated (max deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },
    #[error("chi matrix is not hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("chi matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("operator basis is singular")]
    SingularBasis,
    #[error("unknown channel '{0}'")]
    UnknownChannel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("scheme incompatible with dimension: {0}")]
    IncompatibleScheme(String),
    #[error("shot count must be positive")]
    ZeroShots,
    #[error("pattern length {got} does not match {expected} factors")]
    LengthMismatch { expected: usize, got: usize },
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("failure probability must lie in (0, 1), got {0}")]
    InvalidProbability(f64),

    #[error("unknown identity '{0}'")]
    UnknownIdentity(String),
    #[error("identity '{name}' is not defined for {reason}")]
    IdentityNotApplicable { name: String, reason: String },
}

impl Error {
    /// True when the error reports an input object that breaks an invariant
    /// (as opposed to a bad configuration).
    pub fn is_data_violation(&self) -> bool {
        matches!(
            self,
            Error::NotTracePreserving { .. }
                | Error::NotHermitian { .. }
                | Error::NotPositive { .. }
                | Error::Malformed(_)
                | Error::DimensionMismatch { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
