use thiserror::Error;

use crate::trial_model::Setting;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: malformed record: {msg}")]
    Malformed { line: usize, msg: String },

    #[error("line {line}: field `{field}` out of domain: {value}")]
    OutOfDomain {
        line: usize,
        field: &'static str,
        value: i64,
    },

    #[error("setting cell {0} has no trials")]
    EmptyCell(Setting),

    #[error("correlated count {corr} exceeds trial count {trials}")]
    CountExceedsTrials { corr: u64, trials: u64 },

    #[error("count overflow while merging tallies")]
    Overflow,

    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("total trial count {0} is not divisible by 4; uniform settings assumed")]
    NotUniform(u64),

    #[error("violation magnitude must be a finite nonnegative number, got {0}")]
    NegativeDelta(f64),

    #[error("epsilon must be a finite positive number, got {0}")]
    NonPositiveEpsilon(f64),

    #[error("enumeration of {requested} tallies exceeds cap {cap}")]
    EnumerationCap { requested: u128, cap: u128 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
