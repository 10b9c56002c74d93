//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset file not found: {0}")]
    MissingFile(PathBuf),

    #[error("missing required column `{0}` in header")]
    MissingColumn(String),

    #[error("no data rows in {0}")]
    NoDataRows(PathBuf),

    #[error("row {row}: unknown label `{label}` (expected depressive or non_depressive)")]
    UnknownLabel { row: usize, label: String },

    #[error("row {row}: empty text")]
    EmptyText { row: usize },

    #[error("duplicate post id {0} in corpus")]
    DuplicateId(u32),

    #[error("invalid split ratio: {0}")]
    InvalidRatio(String),

    #[error("split would leave the {0} partition empty")]
    EmptyPartition(&'static str),

    #[error("class {0} absent from the training partition under stratified split")]
    ClassMissing(String),

    #[error("training set contains a single class; oversampling undefined")]
    SingleClassTrain,

    #[error("splits already oversampled")]
    AlreadyOversampled,

    #[error("invalid backend spec: {0}")]
    InvalidBackendSpec(String),

    #[error("cannot fit vectorizer: all documents empty after cleaning")]
    AllDocumentsEmpty,

    #[error("embedding asset error at {path}: {reason}")]
    Asset { path: PathBuf, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid network config: {0}")]
    InvalidNetworkConfig(String),

    #[error("sequence collapsed: input length {input_len} leaves no timesteps after conv/pool")]
    SequenceCollapsed { input_len: usize },

    #[error("batch width {got} does not match network input length {expected}")]
    BatchWidthMismatch { expected: usize, got: usize },

    #[error("invalid training config: {0}")]
    InvalidTrainingConfig(String),

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("validation set empty but validation-monitoring callbacks are enabled")]
    EmptyValidation,

    #[error("label/prediction length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("ROC undefined: y_true contains a single class")]
    SingleClassRoc,

    #[error("incomplete run: no manifest.json in {0}")]
    IncompleteRun(PathBuf),

    #[error("run directory {0} is locked by another writer")]
    RunDirLocked(PathBuf),

    #[error("corrupt run component `{component}`: {reason}")]
    CorruptComponent { component: String, reason: String },

    #[error("dataset fingerprint mismatch: manifest has {expected}, file hashes to {got}")]
    FingerprintMismatch { expected: String, got: String },

    #[error("pipeline version mismatch: run written by {run}, this build is {build}")]
    VersionMismatch { run: String, build: String },

    #[error("invalid run config: {0}")]
    InvalidRunConfig(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("json error in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
