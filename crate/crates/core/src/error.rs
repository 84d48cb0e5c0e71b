use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corpus {0} contains no valid tweet records")]
    EmptyCorpus(PathBuf),

    #[error("malformed {what}: {detail}")]
    Parse { what: String, detail: String },

    #[error("no seed hashtags supplied; at least one labeled hashtag is required")]
    NoSeeds,

    #[error("seed hashtag #{0} is labeled both pro and anti")]
    ConflictingSeed(String),

    #[error("training data contains a single class ({0}); both classes are required")]
    SingleClass(&'static str),

    #[error("training data is empty")]
    EmptyTrainingSet,

    #[error("cannot fit a vocabulary on zero documents")]
    NoDocuments,

    #[error("interaction matrix has no entries")]
    EmptyMatrix,

    #[error("seed hashtags only label {0} users; both stances need at least one seed user")]
    OneSidedSeeds(&'static str),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: {left} predictions vs {right} gold labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("chance agreement p_e must differ from 1")]
    DegenerateChance,

    #[error("stage `{stage}` needs the artifacts of stage `{needs}`; run `{needs}` first (missing {missing})")]
    MissingDependency {
        stage: &'static str,
        needs: &'static str,
        missing: PathBuf,
    },

    #[error("output directory {0} is locked by another run (remove .lock if stale)")]
    Locked(PathBuf),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: impl Into<String>, detail: impl ToString) -> Self {
        Error::Parse {
            what: what.into(),
            detail: detail.to_string(),
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
