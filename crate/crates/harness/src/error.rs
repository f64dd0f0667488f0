use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("runtime error: {0}")]
    Runtime(String),

    /// Plot input does not cover the figure's grid.
    #[error("coverage error: missing cells {0:?}")]
    Coverage(Vec<String>),

    #[error("self-test failed: {0}")]
    SelfTest(String),
}

impl HarnessError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Runtime(_) | HarnessError::Coverage(_) => 2,
            HarnessError::SelfTest(_) => 3,
        }
    }
}

impl From<trbeam::Error> for HarnessError {
    fn from(e: trbeam::Error) -> Self {
        match e {
            trbeam::Error::Config(msg) => HarnessError::Config(msg),
            other => HarnessError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
