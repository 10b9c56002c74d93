//! Subword-averaged static word embeddings.
//!
//! Words are decomposed into character n-grams (the word wrapped in '<' and
//! '>', n-gram lengths `min_n..=max_n`), each n-gram hashed into a fixed
//! bucket table. A known word embeds as the mean of its own vector and its
//! n-gram vectors; an out-of-vocabulary word still embeds as the mean of its
//! n-gram vectors. A document embeds as the mean of its word vectors.
//!
//! The asset is a directory: `config.json` (dimensions, n-gram range, bucket
//! count, word list) + `vectors.safetensors` (`word_vectors` V x D,
//! `bucket_vectors` B x D). The n-gram hash is the FNV-1a signed-byte
//! variant used by common subword-embedding tooling, so existing matrices
//! convert losslessly.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::tokenize;
use crate::tensor_io;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubwordAssetConfig {
    pub dim: usize,
    pub min_n: usize,
    pub max_n: usize,
    pub buckets: usize,
    pub words: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SubwordModel {
    config: SubwordAssetConfig,
    lookup: HashMap<String, usize>,
    /// V x D, row-major.
    word_vectors: Vec<f32>,
    /// B x D, row-major.
    bucket_vectors: Vec<f32>,
}

/// FNV-1a over the n-gram bytes with sign-extended byte mixing.
fn ngram_hash(ngram: &str) -> u32 {
    let mut h: u32 = 2_166_136_261;
    for &b in ngram.as_bytes() {
        h ^= (b as i8) as i32 as u32;
        h = h.wrapping_mul(16_777_619);
    }
    h
}

fn char_ngrams(word: &str, min_n: usize, max_n: usize) -> Vec<String> {
    let wrapped: Vec<char> = std::iter::once('<')
        .chain(word.chars())
        .chain(std::iter::once('>'))
        .collect();
    let mut out = Vec::new();
    for n in min_n..=max_n.min(wrapped.len()) {
        for start in 0..=(wrapped.len() - n) {
            out.push(wrapped[start..start + n].iter().collect());
        }
    }
    out
}

impl SubwordModel {
    pub fn from_parts(
        config: SubwordAssetConfig,
        word_vectors: Vec<f32>,
        bucket_vectors: Vec<f32>,
    ) -> Result<Self> {
        if config.dim == 0 || config.min_n == 0 || config.min_n > config.max_n || config.buckets == 0
        {
            return Err(Error::InvalidBackendSpec(
                "subword asset config out of range".into(),
            ));
        }
        if word_vectors.len() != config.words.len() * config.dim
            || bucket_vectors.len() != config.buckets * config.dim
        {
            return Err(Error::DimensionMismatch {
                expected: config.words.len() * config.dim,
                got: word_vectors.len(),
            });
        }
        let lookup = config
            .words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(SubwordModel {
            config,
            lookup,
            word_vectors,
            bucket_vectors,
        })
    }

    pub fn dimension(&self) -> usize {
        self.config.dim
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        crate::corpus::write_json(&dir.join("config.json"), &self.config)?;
        tensor_io::save_tensors(
            &dir.join("vectors.safetensors"),
            &[
                (
                    "word_vectors".into(),
                    vec![self.config.words.len(), self.config.dim],
                    self.word_vectors.clone(),
                ),
                (
                    "bucket_vectors".into(),
                    vec![self.config.buckets, self.config.dim],
                    self.bucket_vectors.clone(),
                ),
            ],
        )
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let asset_err = |reason: String| Error::Asset {
            path: dir.to_path_buf(),
            reason,
        };
        let config_path = dir.join("config.json");
        if !config_path.exists() {
            return Err(asset_err("config.json not found".into()));
        }
        let config: SubwordAssetConfig = crate::corpus::read_json(&config_path)?;
        let mut tensors = tensor_io::load_tensors(&dir.join("vectors.safetensors"))?;
        let word_vectors = tensor_io::take_tensor(
            &mut tensors,
            "word_vectors",
            &[config.words.len(), config.dim],
        )
        .map_err(|e| asset_err(e.to_string()))?;
        let bucket_vectors = tensor_io::take_tensor(
            &mut tensors,
            "bucket_vectors",
            &[config.buckets, config.dim],
        )
        .map_err(|e| asset_err(e.to_string()))?;
        Self::from_parts(config, word_vectors, bucket_vectors)
    }

    fn bucket_row(&self, ngram: &str) -> &[f32] {
        let idx = (ngram_hash(ngram) as usize) % self.config.buckets;
        &self.bucket_vectors[idx * self.config.dim..(idx + 1) * self.config.dim]
    }

    /// Word vector: mean over the word's own vector (when in vocabulary) and
    /// its n-gram bucket vectors. A word with no parts in range embeds as
    /// zero.
    pub fn word_vector(&self, word: &str) -> Vec<f64> {
        let d = self.config.dim;
        let mut acc = vec![0.0f64; d];
        let mut parts = 0usize;
        if let Some(&idx) = self.lookup.get(word) {
            for (a, v) in acc.iter_mut().zip(&self.word_vectors[idx * d..(idx + 1) * d]) {
                *a += *v as f64;
            }
            parts += 1;
        }
        for ngram in char_ngrams(word, self.config.min_n, self.config.max_n) {
            for (a, v) in acc.iter_mut().zip(self.bucket_row(&ngram)) {
                *a += *v as f64;
            }
            parts += 1;
        }
        if parts > 0 {
            for a in &mut acc {
                *a /= parts as f64;
            }
        }
        acc
    }

    /// Document vector: mean of per-word vectors; zero for empty text.
    pub fn embed(&self, text: &str) -> Vec<f64> {
        let words = tokenize(text);
        let mut out = vec![0.0f64; self.config.dim];
        if words.is_empty() {
            return out;
        }
        for w in &words {
            for (o, v) in out.iter_mut().zip(self.word_vector(w)) {
                *o += v;
            }
        }
        for o in &mut out {
            *o /= words.len() as f64;
        }
        out
    }
}
