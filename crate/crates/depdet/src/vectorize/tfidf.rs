//! TF-IDF vectorizer fitted from scratch on training text.
//!
//! TF(t, d) = count(t in d) / total tokens in d (all tokens, in- or
//! out-of-vocabulary). IDF(t) = ln(N / df_t), no smoothing; df = 0 cannot
//! occur because the vocabulary is drawn from the fit corpus. Output vectors
//! have length `max_features`, zero-padded past the fitted vocabulary.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{read_json, write_json};
use crate::error::{Error, Result};
use crate::preprocess::tokenize;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VocabEntry {
    token: String,
    index: usize,
    idf: f64,
}

/// Fitted TF-IDF model: vocabulary with per-token idf.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfidfModel {
    pub n_documents: usize,
    pub max_features: usize,
    entries: Vec<VocabEntry>,
    #[serde(skip)]
    lookup: HashMap<String, usize>,
}

impl TfidfModel {
    pub fn vocabulary_size(&self) -> usize {
        self.entries.len()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.lookup.get(token).copied()
    }

    pub fn idf(&self, index: usize) -> f64 {
        self.entries[index].idf
    }

    pub fn tokens(&self) -> impl Iterator<Item = (&str, usize, f64)> {
        self.entries.iter().map(|e| (e.token.as_str(), e.index, e.idf))
    }

    fn rebuild_lookup(&mut self) {
        self.lookup = self
            .entries
            .iter()
            .map(|e| (e.token.clone(), e.index))
            .collect();
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<TfidfModel> {
        let mut model: TfidfModel = read_json(path)?;
        for (i, e) in model.entries.iter().enumerate() {
            if e.index != i {
                return Err(Error::CorruptComponent {
                    component: "tfidf".into(),
                    reason: format!("vocabulary index gap at {i} (entry says {})", e.index),
                });
            }
            if !e.idf.is_finite() || e.idf < 0.0 {
                return Err(Error::CorruptComponent {
                    component: "tfidf".into(),
                    reason: format!("idf[{}] = {} out of range", e.index, e.idf),
                });
            }
        }
        model.rebuild_lookup();
        Ok(model)
    }
}

/// Fit on cleaned training texts: vocabulary is the `max_features`
/// highest-total-frequency tokens (ties lexicographic), idf = ln(N / df).
pub fn fit_tfidf(texts: &[String], max_features: usize) -> Result<TfidfModel> {
    if max_features == 0 {
        return Err(Error::InvalidBackendSpec("max_features must be >= 1".into()));
    }
    let n = texts.len();
    let mut total_freq: HashMap<&str, usize> = HashMap::new();
    let mut doc_freq: HashMap<&str, usize> = HashMap::new();
    let mut any_token = false;
    for text in texts {
        let tokens = tokenize(text);
        if !tokens.is_empty() {
            any_token = true;
        }
        let mut seen: HashSet<&str> = HashSet::new();
        for t in tokens {
            *total_freq.entry(t).or_insert(0) += 1;
            if seen.insert(t) {
                *doc_freq.entry(t).or_insert(0) += 1;
            }
        }
    }
    if n == 0 || !any_token {
        return Err(Error::AllDocumentsEmpty);
    }

    let mut ranked: Vec<(&str, usize)> = total_freq.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked.truncate(max_features);

    let entries: Vec<VocabEntry> = ranked
        .into_iter()
        .enumerate()
        .map(|(index, (token, _))| {
            let df = doc_freq[token];
            VocabEntry {
                token: token.to_string(),
                index,
                idf: ((n as f64) / (df as f64)).ln(),
            }
        })
        .collect();

    let mut model = TfidfModel {
        n_documents: n,
        max_features,
        entries,
        lookup: HashMap::new(),
    };
    model.rebuild_lookup();
    Ok(model)
}

/// Transform one cleaned document into its TF-IDF vector of length
/// `max_features`. Out-of-vocabulary tokens contribute only to the TF
/// denominator; empty text gives the zero vector.
pub fn transform_tfidf(model: &TfidfModel, text: &str) -> Vec<f64> {
    let mut values = vec![0.0; model.max_features];
    let tokens = tokenize(text);
    let total = tokens.len();
    if total == 0 {
        return values;
    }
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for t in tokens {
        if let Some(idx) = model.index_of(t) {
            *counts.entry(idx).or_insert(0) += 1;
        }
    }
    for (idx, count) in counts {
        let tf = count as f64 / total as f64;
        values[idx] = tf * model.idf(idx);
    }
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn texts(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    /// Direct double-loop implementation of the TF/IDF formulas, independent
    /// of the fitted model's counting path.
    fn oracle_transform(fit_texts: &[String], vocab: &[(String, usize)], doc: &str) -> Vec<f64> {
        let n = fit_texts.len() as f64;
        let doc_tokens = tokenize(doc);
        let total = doc_tokens.len() as f64;
        let mut out = Vec::new();
        for (token, _) in vocab {
            let df = fit_texts
                .iter()
                .filter(|t| tokenize(t).contains(&token.as_str()))
                .count() as f64;
            let count = doc_tokens.iter().filter(|t| *t == token).count() as f64;
            let tf = if total > 0.0 { count / total } else { 0.0 };
            out.push(tf * (n / df).ln());
        }
        out
    }

    #[test]
    fn idf_matches_hand_computation() {
        let corpus = texts(&["ক খ", "ক"]);
        let model = fit_tfidf(&corpus, 10).unwrap();
        assert_eq!(model.n_documents, 2);
        assert_eq!(model.vocabulary_size(), 2);
        // ক appears in both docs and more often in total -> index 0, idf 0
        let ka = model.index_of("ক").unwrap();
        let kha = model.index_of("খ").unwrap();
        assert_eq!(ka, 0);
        assert_eq!(kha, 1);
        assert_abs_diff_eq!(model.idf(ka), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(model.idf(kha), (2.0f64).ln(), epsilon = 1e-15);
    }

    #[test]
    fn transform_matches_hand_computation() {
        let corpus = texts(&["ক খ", "ক"]);
        let model = fit_tfidf(&corpus, 2).unwrap();
        let v = transform_tfidf(&model, "ক খ");
        assert_abs_diff_eq!(v[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], (2.0f64).ln() * 0.5, epsilon = 1e-15);
        // frozen value: ln(2)/2 = 0.34657...
        assert_abs_diff_eq!(v[1], 0.346_573_590_279_972_6, epsilon = 1e-12);
    }

    #[test]
    fn token_in_every_document_has_zero_idf() {
        let corpus = texts(&["ক খ", "ক গ", "ক"]);
        let model = fit_tfidf(&corpus, 10).unwrap();
        assert_eq!(model.idf(model.index_of("ক").unwrap()), 0.0);
    }

    #[test]
    fn single_document_corpus_all_zero() {
        let corpus = texts(&["ক খ গ"]);
        let model = fit_tfidf(&corpus, 10).unwrap();
        for (_, _, idf) in model.tokens() {
            assert_eq!(idf, 0.0);
        }
        let v = transform_tfidf(&model, "ক খ");
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn empty_and_oov_transform_to_zero() {
        let corpus = texts(&["ক খ", "ক"]);
        let model = fit_tfidf(&corpus, 2).unwrap();
        assert!(transform_tfidf(&model, "").iter().all(|&x| x == 0.0));
        assert!(transform_tfidf(&model, "ঘ ঙ চ").iter().all(|&x| x == 0.0));
    }

    #[test]
    fn fit_on_empty_texts_errors() {
        assert!(fit_tfidf(&[], 10).is_err());
        assert!(fit_tfidf(&texts(&["", ""]), 10).is_err());
    }

    #[test]
    fn max_features_caps_vocabulary_by_frequency_then_lexicographic() {
        let corpus = texts(&["ক ক খ খ গ", "ক ঘ"]);
        // total: ক=3, খ=2, গ=1, ঘ=1 (tie broken lexicographically: গ < ঘ)
        let model = fit_tfidf(&corpus, 3).unwrap();
        assert_eq!(model.vocabulary_size(), 3);
        assert_eq!(model.index_of("ক"), Some(0));
        assert_eq!(model.index_of("খ"), Some(1));
        assert_eq!(model.index_of("গ"), Some(2));
        assert_eq!(model.index_of("ঘ"), None);
        // vector is still max_features long
        assert_eq!(transform_tfidf(&model, "ক").len(), 3);
    }

    #[test]
    fn repetition_homogeneity() {
        // transforming "d d" equals transforming "d": TF ratios unchanged
        let corpus = texts(&["ক খ গ", "ক ঘ", "খ ঙ চ"]);
        let model = fit_tfidf(&corpus, 10).unwrap();
        let single = transform_tfidf(&model, "ক খ ঘ");
        let doubled = transform_tfidf(&model, "ক খ ঘ ক খ ঘ");
        for (a, b) in single.iter().zip(&doubled) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn matches_double_loop_oracle_on_random_corpora() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let alphabet = ["ক", "খ", "গ", "ঘ", "ঙ", "চ", "ছ", "জ"];
        for _ in 0..30 {
            let n_docs = rng.random_range(1..=10);
            let corpus: Vec<String> = (0..n_docs)
                .map(|_| {
                    let len = rng.random_range(0..=8);
                    (0..len)
                        .map(|_| alphabet[rng.random_range(0..alphabet.len())])
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            let Ok(model) = fit_tfidf(&corpus, 6) else {
                continue; // all-empty corpus draw
            };
            let vocab: Vec<(String, usize)> = model
                .tokens()
                .map(|(t, i, _)| (t.to_string(), i))
                .collect();
            let probe: String = (0..rng.random_range(0..=6))
                .map(|_| alphabet[rng.random_range(0..alphabet.len())])
                .collect::<Vec<_>>()
                .join(" ");
            let got = transform_tfidf(&model, &probe);
            let want = oracle_transform(&corpus, &vocab, &probe);
            for (i, (g, w)) in got.iter().zip(&want).enumerate() {
                assert!((g - w).abs() < 1e-9, "entry {i}: {g} vs {w}");
            }
        }
    }

    #[test]
    fn save_load_roundtrip_preserves_idf_exactly() {
        let corpus = texts(&["ক খ গ", "ক ঘ", "খ ঙ চ ছ"]);
        let model = fit_tfidf(&corpus, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tfidf.json");
        model.save(&path).unwrap();
        let loaded = TfidfModel::load(&path).unwrap();
        assert_eq!(loaded.n_documents, model.n_documents);
        assert_eq!(loaded.vocabulary_size(), model.vocabulary_size());
        for ((t1, i1, f1), (t2, i2, f2)) in model.tokens().zip(loaded.tokens()) {
            assert_eq!(t1, t2);
            assert_eq!(i1, i2);
            assert!((f1 - f2).abs() < 1e-12);
        }
    }

    #[test]
    fn corrupt_model_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tfidf.json");
        std::fs::write(&path, "{\"n_documents\": 2}").unwrap();
        assert!(TfidfModel::load(&path).is_err());
        std::fs::write(
            &path,
            "{\"n_documents\":2,\"max_features\":2,\"entries\":[{\"token\":\"a\",\"index\":1,\"idf\":0.0}]}",
        )
        .unwrap();
        assert!(matches!(
            TfidfModel::load(&path).unwrap_err(),
            Error::CorruptComponent { .. }
        ));
    }
}
