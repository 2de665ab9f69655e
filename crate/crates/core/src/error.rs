use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid quorum, model or distribution parameters.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A value outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument outside the supported range (e.g. `t` beyond a profile grid).
    #[error("out of range: {0}")]
    Range(String),

    #[error("unknown preset `{0}` (expected one of: lnkd-ssd, lnkd-disk, ymmr, wan)")]
    UnknownPreset(String),

    #[error(
        "{trials} trials give fewer than {min_tail} expected samples above the {percentile}th percentile"
    )]
    InsufficientTrials {
        trials: u64,
        percentile: f64,
        min_tail: u64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }
}
