use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid stochastic matrix: {0}")]
    NotStochastic(String),

    #[error("invalid probability vector: {0}")]
    NotProbability(String),

    #[error("failed to parse rational {0:?}")]
    ParseRational(String),

    #[error("stationary distribution is not unique (unit eigenspace has dimension {dim})")]
    NonUniqueStationary { dim: usize },

    #[error("eigenbasis is ill-conditioned (condition number {cond:.3e} exceeds cap {cap:.1e}); use a minorization bound instead")]
    IllConditioned { cond: f64, cap: f64 },

    #[error("matrix is not diagonalizable: eigenvalue {re:.6}{im:+.6}i has geometric multiplicity {geometric} < algebraic {algebraic}; use a minorization bound instead")]
    NotDiagonalizable { re: f64, im: f64, geometric: usize, algebraic: usize },

    #[error("chain has {count} eigenvalues of unit modulus (periodic or reducible chain)")]
    MultipleUnitEigenvalues { count: usize },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("bound does not fall below {delta} within {cap} steps")]
    Unreachable { delta: f64, cap: u64 },

    #[error("small set too small for drift conversion: d = {d} <= b/(1-lambda) - 1 = {threshold}")]
    SmallSetTooSmall { d: f64, threshold: f64 },

    #[error("quadrature failed to converge on [{a}, {b}]: estimate {estimate}, error {error_estimate:.3e} after {evaluations} evaluations")]
    Quadrature { a: f64, b: f64, estimate: f64, error_estimate: f64, evaluations: usize },

    #[error("containment check failed: mass outside D is {mass_outside:.3e} at x = {x}")]
    Containment { x: f64, mass_outside: f64 },

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}
