use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse model file: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("lambda {lambda} ({label}), pair {pair}: negative probability {value} at slot {slot}")]
    NegativeProbability {
        lambda: usize,
        label: String,
        pair: &'static str,
        slot: usize,
        value: f64,
    },

    #[error("lambda {lambda} ({label}), pair {pair}: probabilities sum to {sum}, expected 1")]
    Normalization {
        lambda: usize,
        label: String,
        pair: &'static str,
        sum: f64,
    },

    #[error("weights for pair {pair} sum to {sum}, expected 1")]
    WeightSum { pair: &'static str, sum: f64 },

    #[error("lambda {lambda} ({label}): weight {value} for pair {pair} is outside [0, 1]")]
    WeightRange {
        lambda: usize,
        label: String,
        pair: &'static str,
        value: f64,
    },

    #[error("lambda {lambda} ({label}): missing setting pair {key}")]
    MissingPair {
        lambda: usize,
        label: String,
        key: &'static str,
    },

    #[error("lambda {lambda} ({label}): unknown setting pair key {key:?}")]
    UnknownPair {
        lambda: usize,
        label: String,
        key: String,
    },

    #[error("lambda {lambda} ({label}): {reason}")]
    WeightSpec {
        lambda: usize,
        label: String,
        reason: &'static str,
    },

    #[error("model has no lambda entries")]
    EmptyModel,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("model lacks freedom of choice (M = {m}); the relaxed bound assumes setting-independent weights")]
    NotFreeChoice { m: f64 },

    #[error("direction {0:?} is not a unit vector")]
    NonUnitVector([f64; 3]),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal invariant breached: {0}")]
    InvariantBreach(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 1,
            Error::InvariantBreach(_) => 3,
            _ => 2,
        }
    }
}

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<()> {
    if value.is_nan() || value < lo || value > hi {
        return Err(Error::OutOfRange { name, value, range });
    }
    Ok(())
}
