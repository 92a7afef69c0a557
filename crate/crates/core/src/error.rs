use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("d must be ≥ 2 (got {0})")]
    DegreeTooSmall(u64),
    #[error("at least one edge length is required")]
    NoLengths,
    #[error("edge lengths must be ≥ 1")]
    ZeroLength,
    #[error("lengths not increasing: {0:?}")]
    LengthsNotIncreasing(Vec<u32>),
    #[error("{lengths} lengths but {probs} probabilities")]
    LengthMismatch { lengths: usize, probs: usize },
    #[error("probability p_{index} = {value} is outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f64 },
    #[error("reduced degree {d}^{power} overflows")]
    DegreeOverflow { d: u64, power: u32 },
    #[error("state space too large: word length {len} exceeds cap {cap}")]
    StateSpaceTooLarge { len: u32, cap: u32 },
    #[error("invalid state index {index} for word length {len}")]
    InvalidIndex { index: u64, len: u32 },
    #[error("instance is not gcd-reduced (gcd of lengths = {0})")]
    NotReduced(u32),
    #[error("{0}")]
    Domain(String),
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),
    #[error("no convergence after {iterations} iterations (last estimate {estimate}, residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        estimate: f64,
        residual: f64,
    },
    #[error("memory budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Numerical failures, as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::UndefinedRatio(_))
    }
}
