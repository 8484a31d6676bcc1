use thiserror::Error;

use crate::coeff::Bidegree;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("prime {0} is too large")]
    PrimeTooLarge(u32),
    #[error("the classes t and r only exist at the prime 2")]
    CoefficientAtOddPrime,
    #[error("operands live over different primes ({0} and {1})")]
    PrimeMismatch(u32, u32),
    #[error("Adem relation out of range: {0}")]
    AdemRange(String),
    #[error("expected a homogeneous element")]
    NotHomogeneous,
    #[error("bidegree mismatch: {0} vs {1}")]
    BidegreeMismatch(Bidegree, Bidegree),
    #[error("polynomial is not symmetric")]
    NotSymmetric,
    #[error("ring mismatch")]
    RingMismatch,
    #[error("invalid ring parameters: {0}")]
    InvalidRing(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
