//! Train/evaluate toolkit for binary depressive-post classification in
//! Bangla.
//!
//! The pipeline: load a labeled post corpus, split it leakage-safely
//! (oversampling duplicates only inside the training partition), clean the
//! text, vectorize it with one of several interchangeable backends, train a
//! CNN-BiLSTM classifier and evaluate it with a full metric suite
//! (confusion matrix, weighted precision/recall/F1, ROC/AUC). Every stage
//! is seeded and persists its products into a self-describing run
//! directory.
//!
//! Modules map onto pipeline stages:
//!
//! - [`corpus`]: loading, validation, splitting, oversampling, analytics
//! - [`preprocess`]: deterministic text cleaning and tokenization
//! - [`vectorize`]: TF-IDF, contextual-transformer, subword and hashed
//!   document-vector backends
//! - [`network`]: the CNN-BiLSTM classifier with a verifiable parameter
//!   ledger
//! - [`train`]: Adam training loop with early stopping and
//!   reduce-LR-on-plateau
//! - [`evaluate`]: confusion matrix, weighted metrics, ROC and AUC
//! - [`artifacts`]: run-directory persistence and reload
//! - [`pipeline`]: end-to-end wiring used by the CLI
//! - [`synth`]: deterministic synthetic corpora for offline runs and tests

pub mod artifacts;
pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod network;
pub mod pipeline;
pub mod preprocess;
pub mod synth;
mod tensor_io;
pub mod train;
pub mod vectorize;

pub use error::{Error, Result};
