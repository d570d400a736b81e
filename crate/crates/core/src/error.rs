use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("distribution must contain at least one weight")]
    EmptyDistribution,

    #[error("weight {index} = {value} must lie strictly between 0 and 1")]
    InvalidWeight { index: usize, value: String },

    #[error("total mass {total} exceeds 1")]
    MassExceedsOne { total: String },

    #[error("{n} coupons exceed the {max}-bit subset representation")]
    TooManyCoupons { n: usize, max: usize },

    #[error("index {index} out of range for {len} coupons")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("{0}")]
    OutOfRange(String),

    #[error("{required} subset visits exceed the enumeration cap of {cap}; use the almost-uniform formula or Monte Carlo")]
    EnumerationCap { required: u128, cap: u64 },

    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    #[error("step {step}: pair ({i}, {j}) does not straddle the target {target}")]
    ScheduleViolation {
        step: usize,
        i: usize,
        j: usize,
        target: String,
    },

    #[error("schedule ended after {steps} steps without reaching the almost-uniform vector")]
    IncompleteSchedule { steps: usize },

    #[error("cannot parse {input:?} at byte {position}: {reason}")]
    Parse {
        input: String,
        position: usize,
        reason: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("incomparable routers: {0}")]
    Incomparable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by a resource cap rather than invalid input.
    pub fn is_cap(&self) -> bool {
        matches!(
            self,
            Error::EnumerationCap { .. } | Error::InstanceTooLarge(_) | Error::TooManyCoupons { .. }
        )
    }
}
