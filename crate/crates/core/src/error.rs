use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("date {0} is before 1980-01-01")]
    DateOutOfRange(chrono::NaiveDate),

    #[error("invalid reference table: {0}")]
    ReferenceTable(String),

    #[error("proceeding {0} is not present in the cohort index")]
    CorpusMismatch(String),

    #[error("unknown judge {0}")]
    UnknownJudge(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("correlation undefined: {0}")]
    Undefined(String),

    #[error("corpus of {len} records exceeds the oracle limit of {limit}")]
    OracleRefused { len: usize, limit: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
