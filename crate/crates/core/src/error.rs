use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Least-squares system whose triangular factor is numerically singular.
    #[error("rank-deficient system (condition estimate {condition:.3e})")]
    RankDeficient { condition: f64 },

    /// Gram matrix still singular after Tikhonov regularization.
    #[error("near-singular Gram matrix (condition estimate {condition:.3e})")]
    NearSingular { condition: f64 },

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("equalizer design failed for user {user}: {source}")]
    Equalizer {
        user: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),

    #[error("simulation error: {0}")]
    Simulation(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("header mismatch: {0}")]
    HeaderMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
