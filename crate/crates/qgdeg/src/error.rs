use thiserror::Error;

/// Errors produced by the exact-arithmetic layers of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} and {1} are not coprime")]
    NotCoprime(String, String),
    #[error("input out of range: {0}")]
    OutOfRange(String),
    #[error("invalid continued-fraction data: {0}")]
    BadExpansion(String),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not negative definite")]
    NotNegativeDefinite,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("invalid fan: {0}")]
    InvalidFan(String),
    #[error("rays are parallel")]
    ParallelRays,
    #[error("cone is not of class T: {0}")]
    NotClassT(String),
    #[error("unknown curve {0}")]
    UnknownCurve(String),
    #[error("intersection number undefined: {0}")]
    UndefinedPairing(String),
    #[error("divisor is not integral on {0}")]
    NonIntegralDivisor(String),
    #[error("divisor class does not generate the required link quotient: {0}")]
    NotAGenerator(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("Euler pairing is not integral: {0}")]
    NonIntegralChi(String),
    #[error("stability residue {residue} shares a factor with n = {n}")]
    ResidueNotCoprime { residue: String, n: String },
    #[error("{0} is not a perfect square, no integral lambda exists")]
    NoIntegralLambda(String),
    #[error("triple does not satisfy the equation: {0}")]
    InvalidTriple(String),
    #[error("mutation index {0} out of range (expected 1..=3)")]
    BadMutationIndex(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
