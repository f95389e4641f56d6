use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),

    #[error("self-loop on `{0}`")]
    SelfLoop(String),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(String, String),

    #[error("weight {weight} on ({u}, {v}) is outside [-1, 1]")]
    WeightOutOfRange { u: String, v: String, weight: f64 },

    #[error("edge ({u}, {v}) has weight {weight}; signed (benchmark) graphs need weights in {{-1, +1}}")]
    NotSigned { u: String, v: String, weight: f64 },

    #[error("graphs do not share the same vertex set")]
    VertexMismatch,

    #[error("{0}")]
    InvalidInput(String),

    #[error("{what} supports at most {limit} vertices, got {size}{}", hint.map(|h| format!("; {h}")).unwrap_or_default())]
    Capacity {
        what: &'static str,
        size: usize,
        limit: usize,
        hint: Option<&'static str>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
