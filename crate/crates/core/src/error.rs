use thiserror::Error;

/// Errors raised by learners, generators, mechanisms and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty argmax")]
    EmptyArgmax,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// select/feed called out of order, or rounds fed out of sequence.
    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("reward {value} outside the admissible range {range}")]
    RewardOutOfRange { value: f64, range: &'static str },

    #[error("no policies available at round {0}")]
    NoPolicies(u64),

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown oracle scenario `{0}`")]
    UnknownScenario(String),

    #[error("trace format error at line {line}: {message}")]
    TraceFormat { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used in the CLI error record.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyArgmax => "empty_argmax",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Protocol(_) => "protocol",
            Error::RewardOutOfRange { .. } => "reward_out_of_range",
            Error::NoPolicies(_) => "no_policies",
            Error::OutOfDomain(_) => "out_of_domain",
            Error::Overflow(_) => "overflow",
            Error::Config(_) => "config",
            Error::UnknownScenario(_) => "unknown_scenario",
            Error::TraceFormat { .. } => "trace_format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
