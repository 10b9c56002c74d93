//! Document vectorization backends.
//!
//! Four interchangeable backends turn cleaned text into fixed-dimension
//! numeric vectors: TF-IDF fitted on training text, a pooled
//! contextual-transformer embedding, a subword-averaged static embedding,
//! and a deterministic hashed backend that needs no assets (test/offline
//! use only, never a reportable configuration).

mod contextual;
mod hashed;
mod subword;
mod tfidf;

use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use contextual::{ContextualAssetConfig, ContextualEncoder};
pub use hashed::HashedBackend;
pub use subword::SubwordModel;
pub use tfidf::{fit_tfidf, transform_tfidf, TfidfModel};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Tfidf,
    Contextual,
    Subword,
    HashedTest,
}

impl BackendKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BackendKind::Tfidf => "tfidf",
            BackendKind::Contextual => "contextual",
            BackendKind::Subword => "subword",
            BackendKind::HashedTest => "hashed_test",
        }
    }
}

/// How a contextual backend collapses per-token vectors into one document
/// vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    Mean,
    FirstToken,
}

/// Declarative description of a vectorization backend.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct EmbeddingBackendSpec {
    pub kind: BackendKind,
    /// Output dimension. For TF-IDF this doubles as max_features.
    pub dimension: usize,
    /// Pretrained asset path or registry name (CONTEXTUAL/SUBWORD only).
    pub asset_ref: String,
    /// CONTEXTUAL only.
    pub pooling: Pooling,
    /// CONTEXTUAL truncation length, in tokenizer tokens.
    pub max_tokens: usize,
}

impl Default for EmbeddingBackendSpec {
    fn default() -> Self {
        EmbeddingBackendSpec {
            kind: BackendKind::Tfidf,
            dimension: 300,
            asset_ref: String::new(),
            pooling: Pooling::Mean,
            max_tokens: 128,
        }
    }
}

impl EmbeddingBackendSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidBackendSpec("dimension must be > 0".into()));
        }
        match self.kind {
            BackendKind::Contextual | BackendKind::Subword => {
                if self.asset_ref.is_empty() {
                    return Err(Error::InvalidBackendSpec(format!(
                        "{} backend requires asset_ref",
                        self.kind.as_str()
                    )));
                }
            }
            BackendKind::Tfidf | BackendKind::HashedTest => {}
        }
        if self.kind == BackendKind::Contextual && self.max_tokens == 0 {
            return Err(Error::InvalidBackendSpec("max_tokens must be > 0".into()));
        }
        Ok(())
    }

    /// Resolve `asset_ref` against the asset cache directory when it is not
    /// a directly visible path.
    pub fn resolve_asset(&self, cache_dir: Option<&Path>) -> PathBuf {
        let direct = PathBuf::from(&self.asset_ref);
        if direct.exists() {
            return direct;
        }
        match cache_dir {
            Some(dir) => dir.join(&self.asset_ref),
            None => direct,
        }
    }
}

/// Fixed-dimension numeric representation of one post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentVector {
    pub values: Vec<f64>,
    pub backend: BackendKind,
}

impl DocumentVector {
    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// A fitted/loaded vectorization engine. Immutable once constructed;
/// per-document transforms are pure.
#[derive(Debug, Clone)]
pub enum Vectorizer {
    Tfidf(TfidfModel),
    Contextual(Box<ContextualEncoder>),
    Subword(SubwordModel),
    Hashed(HashedBackend),
}

impl Vectorizer {
    /// Construct from a backend spec. TF-IDF fits on the supplied training
    /// texts; asset-backed kinds load their pretrained asset; the hashed
    /// kind needs nothing.
    pub fn build(
        spec: &EmbeddingBackendSpec,
        train_texts: &[String],
        asset_cache: Option<&Path>,
    ) -> Result<Vectorizer> {
        spec.validate()?;
        match spec.kind {
            BackendKind::Tfidf => Ok(Vectorizer::Tfidf(fit_tfidf(train_texts, spec.dimension)?)),
            BackendKind::HashedTest => Ok(Vectorizer::Hashed(HashedBackend::new(spec.dimension))),
            BackendKind::Contextual => {
                let encoder =
                    ContextualEncoder::load(&spec.resolve_asset(asset_cache), spec.pooling, spec.max_tokens)?;
                if encoder.dimension() != spec.dimension {
                    return Err(Error::DimensionMismatch {
                        expected: spec.dimension,
                        got: encoder.dimension(),
                    });
                }
                Ok(Vectorizer::Contextual(Box::new(encoder)))
            }
            BackendKind::Subword => {
                let model = SubwordModel::load(&spec.resolve_asset(asset_cache))?;
                if model.dimension() != spec.dimension {
                    return Err(Error::DimensionMismatch {
                        expected: spec.dimension,
                        got: model.dimension(),
                    });
                }
                Ok(Vectorizer::Subword(model))
            }
        }
    }

    pub fn kind(&self) -> BackendKind {
        match self {
            Vectorizer::Tfidf(_) => BackendKind::Tfidf,
            Vectorizer::Contextual(_) => BackendKind::Contextual,
            Vectorizer::Subword(_) => BackendKind::Subword,
            Vectorizer::Hashed(_) => BackendKind::HashedTest,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Vectorizer::Tfidf(m) => m.max_features,
            Vectorizer::Contextual(e) => e.dimension(),
            Vectorizer::Subword(m) => m.dimension(),
            Vectorizer::Hashed(h) => h.dimension(),
        }
    }

    /// Embed one cleaned document. Empty text yields the zero vector for
    /// every backend.
    pub fn embed(&self, text: &str) -> Result<DocumentVector> {
        let values = match self {
            Vectorizer::Tfidf(m) => transform_tfidf(m, text),
            Vectorizer::Contextual(e) => e.embed(text)?,
            Vectorizer::Subword(m) => m.embed(text),
            Vectorizer::Hashed(h) => h.embed(text),
        };
        debug_assert_eq!(values.len(), self.dimension());
        Ok(DocumentVector {
            values,
            backend: self.kind(),
        })
    }
}

/// Vectorize a list of cleaned texts into an n_texts x D matrix; row i is
/// the vector of text i.
pub fn vectorize_corpus(vectorizer: &Vectorizer, texts: &[String]) -> Result<Array2<f64>> {
    let d = vectorizer.dimension();
    let mut matrix = Array2::zeros((texts.len(), d));
    for (i, text) in texts.iter().enumerate() {
        let v = vectorizer.embed(text)?;
        for (j, value) in v.values.iter().enumerate() {
            matrix[[i, j]] = *value;
        }
    }
    Ok(matrix)
}

/// f32 copy of [`vectorize_corpus`] output, as consumed by the network.
pub fn vectorize_corpus_f32(vectorizer: &Vectorizer, texts: &[String]) -> Result<Array2<f32>> {
    Ok(vectorize_corpus(vectorizer, texts)?.mapv(|v| v as f32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        let mut spec = EmbeddingBackendSpec {
            kind: BackendKind::Contextual,
            ..Default::default()
        };
        assert!(spec.validate().is_err(), "missing asset_ref must fail");
        spec.asset_ref = "some/dir".into();
        assert!(spec.validate().is_ok());
        spec.dimension = 0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn empty_corpus_vectorizes_to_empty_matrix() {
        let v = Vectorizer::Hashed(HashedBackend::new(8));
        let m = vectorize_corpus(&v, &[]).unwrap();
        assert_eq!(m.shape(), &[0, 8]);
    }

    #[test]
    fn rows_match_per_document_embedding_and_permutation() {
        let v = Vectorizer::Hashed(HashedBackend::new(16));
        let texts: Vec<String> = ["ক খ", "গ", "ক গ ঘ", "ঙ চ ছ"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let m = vectorize_corpus(&v, &texts).unwrap();
        for (i, t) in texts.iter().enumerate() {
            let row: Vec<f64> = m.row(i).to_vec();
            assert_eq!(row, v.embed(t).unwrap().values, "row {i}");
        }
        // permuted input -> permuted rows
        let perm = [2usize, 0, 3, 1];
        let permuted: Vec<String> = perm.iter().map(|&i| texts[i].clone()).collect();
        let mp = vectorize_corpus(&v, &permuted).unwrap();
        for (new_row, &old_row) in perm.iter().enumerate() {
            assert_eq!(mp.row(new_row), m.row(old_row));
        }
    }
}
