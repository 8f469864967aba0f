use num_bigint::BigUint;
use thiserror::Error;

/// Errors produced by the cyclotomic toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("sieve capacity exceeded: {hi} > {capacity}")]
    CapacityExceeded { hi: u64, capacity: u64 },

    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: u64, hi: u64 },

    #[error("polynomial division is not exact")]
    InexactDivision,

    #[error("division by the zero polynomial")]
    DivisionByZero,

    #[error("requested precision {requested} bits exceeds cap of {cap} bits")]
    PrecisionOverflow { requested: u32, cap: u32 },

    #[error("precision must be at least {min} bits, got {requested}")]
    PrecisionTooLow { requested: u32, min: u32 },

    #[error("degree cap exceeded for n = {n}: phi(n) = {degree} > {cap}")]
    DegreeCapExceeded { n: BigUint, degree: BigUint, cap: u64 },

    #[error("n must be positive")]
    ZeroArgument,

    #[error("malformed prime tuple: {0}")]
    MalformedTuple(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed gap pattern: {0}")]
    MalformedPattern(String),

    #[error("witness point is not coprime to the modulus (gcd = {gcd})")]
    NonCoprimePoint { gcd: String },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("interval contains zero; cannot divide")]
    IndeterminateSign,

    #[error("only {found} of {wanted} tuples found below {limit}")]
    NotEnoughTuples { found: usize, wanted: usize, limit: u64 },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
