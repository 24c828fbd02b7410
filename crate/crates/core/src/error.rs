use thiserror::Error;

/// Errors raised by the codec, bounds and experiment harness.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid size: cannot draw {m} elements from a universe of {universe}")]
    InvalidSize { universe: u64, m: u64 },
    #[error("query index {j} outside [1..{n}]")]
    QueryOutOfRange { j: u64, n: u64 },
    #[error("codeword length {len} is not a valid level (expected {min}..={max})")]
    LengthOutOfRange { len: u64, min: u64, max: u64 },
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error("invalid codeword: {0}")]
    InvalidCodeword(String),
    #[error("no level up to k_max = {k_max} accepts the input; retry with a larger k_max or another seed")]
    SearchCapExceeded { k_max: u64 },
    #[error("inconsistent codeword: recovered {found} ones, expected {expected}")]
    InconsistentCodeword { found: usize, expected: u32 },
    #[error("exact count unavailable: {0}")]
    ExactCountUnavailable(String),
    #[error("{count} of {trials} trials exceeded the search cap k_max = {k_max}")]
    TrialsOverflowed { count: u64, trials: u64, k_max: u64 },
    #[error("instance too large for exhaustive enumeration: C(n, r) = {count} > {limit}")]
    GuardViolation { count: String, limit: u64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
