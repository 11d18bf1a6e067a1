//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when building channels, decoding, or
/// evaluating rates.
///
/// Programming mistakes that violate documented call contracts (e.g. mixing
/// elements of different fields in one arithmetic expression) panic instead;
/// this enum covers conditions a correct caller can still run into with
/// legitimate inputs.
#[derive(Debug, Error)]
pub enum Error {
    /// The requested modulus is not a prime in the supported range.
    #[error("modulus {0} is not a prime in 2..=65521")]
    NotPrime(u64),

    /// Multiplicative inverse of the zero element requested.
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    /// A square matrix turned out singular; carries the rank found.
    #[error("matrix is singular: rank {rank} < {need}")]
    RankDeficient { rank: usize, need: usize },

    /// Row selection cannot reach the requested number of independent rows.
    #[error("only {rank} independent rows available, {need} required")]
    InfeasibleSelection { rank: usize, need: usize },

    /// Signal-to-noise ratio must be strictly positive and finite.
    #[error("snr must be positive and finite, got {0}")]
    SnrOutOfRange(f64),

    /// A real value claimed to be a constellation point is not within
    /// tolerance of one.
    #[error("{value} is not within {tol} of a constellation point")]
    NotAConstellationPoint { value: f64, tol: f64 },

    /// No perturbation of the rounded coefficient matrix fixes the rank.
    #[error("no integer coefficient matrix with full-rank residue found within {candidates} rounding candidates")]
    UnrepairableChannel { candidates: u128 },

    /// An exhaustive enumeration would exceed its documented cap.
    #[error("enumeration of {required} elements exceeds cap {cap}")]
    EnumerationCap { required: u128, cap: u128 },

    /// A probability vector failed validation.
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    /// Rejection sampling gave up after too many consecutive misses.
    #[error("rejection sampling found no admissible draw in {attempts} attempts")]
    RejectionExhausted { attempts: u64 },

    /// The requested operation does not apply to the given channel shape.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// Text input could not be parsed; line numbers are 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
