use std::io;
use std::path::PathBuf;

/// Errors produced by the library. CLI maps these onto exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Stream(#[from] io::Error),

    #[error("{path}: line {line}: {message}")]
    Line {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid query {name:?}: {message}")]
    Query { name: String, message: String },

    #[error("sample of {requested} requested from a population of {population}")]
    SampleTooLarge { requested: usize, population: usize },

    #[error("invalid sampling rate {0}; expected a fraction in (0, 1]")]
    SampleRate(f64),

    #[error("no matched tokens")]
    NoMatchedTokens,

    #[error("no unmatched tokens")]
    NoUnmatchedTokens,

    #[error("query {0:?} selects no messages")]
    EmptySelection(String),

    #[error("label sequences differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("degenerate training set: {0}")]
    DegenerateTrainingSet(String),

    #[error("invalid hyperparameters: {0}")]
    Hyperparams(String),

    #[error("not enough examples: {0}")]
    NotEnoughExamples(String),

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("malformed model file: {0}")]
    Model(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn line(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Line {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
