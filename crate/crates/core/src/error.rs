use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // numeric failures
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },
    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("shape mismatch: {0}")]
    BadShape(String),
    #[error("requested {k} components but at most {max} are available")]
    KTooLarge { k: usize, max: usize },

    // data failures
    #[error("need at least 2 rows, got {rows}")]
    TooFewRows { rows: usize },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: String,
        message: String,
    },
    #[error("label column `{0}` not found in header")]
    UnknownLabelColumn(String),
    #[error("dataset is empty after cleaning")]
    EmptyAfterCleaning,
    #[error("unknown dataset `{0}` (expected iris, heart, a .csv path or synthetic:n,d,informative,sep)")]
    UnknownDataset(String),
    #[error("class `{class}` has {count} samples, fewer than the {k} folds requested")]
    ClassTooSmall {
        class: String,
        count: usize,
        k: usize,
    },
    #[error("training data contains a single class")]
    SingleClass,
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    // configuration / usage failures
    #[error("variance threshold {0} outside the valid range (0,1]")]
    BadThreshold(f64),
    #[error("invalid configuration: {0}")]
    BadConfig(String),

    #[error("arm `{arm}` failed: {source}")]
    Arm {
        arm: String,
        #[source]
        source: Box<Error>,
    },
}

/// Broad failure category, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numeric,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_arm(self, arm: &str) -> Self {
        Error::Arm {
            arm: arm.to_string(),
            source: Box::new(self),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NonSymmetric { .. }
            | Error::NoConvergence { .. }
            | Error::NonFinite(_)
            | Error::BadShape(_)
            | Error::KTooLarge { .. } => ErrorKind::Numeric,
            Error::TooFewRows { .. }
            | Error::Parse { .. }
            | Error::UnknownLabelColumn(_)
            | Error::EmptyAfterCleaning
            | Error::UnknownDataset(_)
            | Error::ClassTooSmall { .. }
            | Error::SingleClass
            | Error::Io { .. } => ErrorKind::Data,
            Error::BadThreshold(_) | Error::BadConfig(_) => ErrorKind::Usage,
            Error::Arm { source, .. } => source.kind(),
        }
    }
}
