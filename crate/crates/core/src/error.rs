use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// The table itself is malformed (missing/duplicate entries, wrong length).
    #[error("malformed table: {0}")]
    Structural(String),

    #[error("behavior is signaling: party {party} setting {setting_a} vs {setting_b} changes the marginal of the other parties (residual {residual:e})")]
    Signaling {
        party: usize,
        setting_a: usize,
        setting_b: usize,
        residual: f64,
    },

    #[error("conditioning on an outcome of probability zero")]
    ZeroProbability,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{what} too large: {size} exceeds cap {cap}")]
    CapExceeded { what: String, size: u128, cap: u128 },

    #[error("locality violation: {0}")]
    Locality(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("linear program {0}")]
    Lp(String),

    /// A file parsed as JSON but does not fit the expected schema.
    #[error("{}", match .line { Some(l) => format!("schema error at line {l}: {message}"), None => format!("schema error: {message}") })]
    Schema { line: Option<usize>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn cap(what: impl Into<String>, size: impl TryInto<u128>, cap: impl TryInto<u128>) -> Self {
        Error::CapExceeded {
            what: what.into(),
            size: size.try_into().unwrap_or(u128::MAX),
            cap: cap.try_into().unwrap_or(u128::MAX),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
