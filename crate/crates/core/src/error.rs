use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },

    #[error("no half in GF(2): {0} is odd")]
    NoHalf(u32),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |M - M^dagger| = {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not unitary (max |U U^dagger - I| = {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("matrix does not have unit trace (|Tr - 1| = {residual:e})")]
    NotUnitTrace { residual: f64 },

    #[error("Kraus operators are not trace preserving (max |sum B^dagger B - I| = {residual:e})")]
    NotTracePreserving { residual: f64 },

    #[error("result should be real but has imaginary residue {residual:e}")]
    NotReal { residual: f64 },

    #[error("malformed line: {0}")]
    MalformedLine(String),

    #[error("unsupported for N = {n}: {reason}")]
    Unsupported { n: u32, reason: &'static str },

    #[error("N = {n} exceeds the supported maximum {max} for this operation")]
    TooLarge { n: u32, max: u32 },

    #[error("rate matrix is not a Hamiltonian flow (fixed-point residual {residual:e})")]
    IllegalRates { residual: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
