use thiserror::Error;

/// Errors shared by every module of the crate.
///
/// The CLI maps these onto exit codes: domain errors exit 1, budget
/// overruns exit 2, invariant violations (always a bug) exit 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ring mismatch: operands live in different rings")]
    RingMismatch,

    #[error("element is not a unit (residue is zero mod p)")]
    NotAUnit,

    #[error("cannot raise precision from {have} to {want}; only reduction is supported")]
    PrecisionIncrease { have: u32, want: u32 },

    #[error("enumeration of {required} items exceeds cap {cap}")]
    EnumerationTooLarge { required: u128, cap: u64 },

    #[error("matrix is not invertible (residue determinant is zero)")]
    NotInvertible,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invariant violation (bug): {0}")]
    InvariantViolation(String),

    #[error("({c}, {d}) are not coprime")]
    NotCoprime { c: u64, d: u64 },

    #[error("pair ({i}, {j}) is not in the negative index region")]
    PairNotInJMinus { i: usize, j: usize },

    #[error("orbit exceeded budget {cap}; partial size lower bound {partial}")]
    OrbitTooLarge { partial: u64, cap: u64 },

    #[error("non-integral quotient (bug): {0}")]
    NonIntegralQuotient(String),

    #[error("triple does not map to an automorphism: {0}")]
    NotAnAutomorphism(String),

    #[error("symplectic condition violated: {0}")]
    SymplecticViolation(String),

    #[error("insufficient precision: coefficients {uncertain:?} have censored valuations that affect the hull")]
    InsufficientPrecision { uncertain: Vec<usize> },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("bad input: {0}")]
    BadInput(String),
}

impl Error {
    /// Exit-code class used by the CLI: 1 domain, 2 budget, 3 bug.
    pub fn exit_class(&self) -> i32 {
        match self {
            Error::EnumerationTooLarge { .. } | Error::OrbitTooLarge { .. } => 2,
            Error::InvariantViolation(_) | Error::NonIntegralQuotient(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
