//! Pooled contextual-transformer document embeddings.
//!
//! Loads a pretrained encoder asset (directory with `config.json`,
//! `vocab.txt`, `weights.safetensors`), tokenizes with the asset's WordPiece
//! vocabulary, runs the transformer encoder stack and pools the final-layer
//! token vectors into one document vector. Inference only; no training.
//!
//! Tensor names in `weights.safetensors`:
//! `embeddings.word` (V x D), `embeddings.position` (P x D),
//! `embeddings.ln.{gamma,beta}` (D), and per layer i:
//! `layer{i}.attn.{wq,wk,wv,wo}` (D x D), `layer{i}.attn.{bq,bk,bv,bo}` (D),
//! `layer{i}.attn_ln.{gamma,beta}` (D), `layer{i}.ffn.w1` (D x F),
//! `layer{i}.ffn.b1` (F), `layer{i}.ffn.w2` (F x D), `layer{i}.ffn.b2` (D),
//! `layer{i}.ffn_ln.{gamma,beta}` (D).

use std::collections::HashMap;
use std::path::Path;

use ndarray::{s, Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::tokenize;
use crate::tensor_io;
use crate::vectorize::Pooling;

pub const CLS_TOKEN: &str = "[CLS]";
pub const SEP_TOKEN: &str = "[SEP]";
pub const UNK_TOKEN: &str = "[UNK]";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContextualAssetConfig {
    pub dim: usize,
    pub n_layers: usize,
    pub n_heads: usize,
    pub ffn_dim: usize,
    pub max_position: usize,
    pub layer_norm_eps: f32,
}

#[derive(Debug, Clone)]
struct EncoderLayer {
    wq: Array2<f32>,
    bq: Array1<f32>,
    wk: Array2<f32>,
    bk: Array1<f32>,
    wv: Array2<f32>,
    bv: Array1<f32>,
    wo: Array2<f32>,
    bo: Array1<f32>,
    attn_ln: (Array1<f32>, Array1<f32>),
    w1: Array2<f32>,
    b1: Array1<f32>,
    w2: Array2<f32>,
    b2: Array1<f32>,
    ffn_ln: (Array1<f32>, Array1<f32>),
}

#[derive(Debug, Clone)]
pub struct ContextualEncoder {
    config: ContextualAssetConfig,
    vocab: Vec<String>,
    lookup: HashMap<String, usize>,
    word_emb: Array2<f32>,
    pos_emb: Array2<f32>,
    emb_ln: (Array1<f32>, Array1<f32>),
    layers: Vec<EncoderLayer>,
    pooling: Pooling,
    max_tokens: usize,
}

fn layer_norm(x: &mut Array2<f32>, gamma: &Array1<f32>, beta: &Array1<f32>, eps: f32) {
    for mut row in x.rows_mut() {
        let n = row.len() as f32;
        let mean = row.sum() / n;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f32>() / n;
        let inv = 1.0 / (var + eps).sqrt();
        for (j, v) in row.iter_mut().enumerate() {
            *v = (*v - mean) * inv * gamma[j] + beta[j];
        }
    }
}

fn gelu(x: f32) -> f32 {
    // tanh approximation
    0.5 * x * (1.0 + ((2.0 / std::f32::consts::PI).sqrt() * (x + 0.044715 * x * x * x)).tanh())
}

fn softmax_rows(x: &mut Array2<f32>) {
    for mut row in x.rows_mut() {
        let max = row.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

impl ContextualEncoder {
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        config: ContextualAssetConfig,
        vocab: Vec<String>,
        word_emb: Array2<f32>,
        pos_emb: Array2<f32>,
        emb_ln: (Array1<f32>, Array1<f32>),
        layer_tensors: Vec<Vec<(Array2<f32>, Array1<f32>)>>,
        layer_norms: Vec<((Array1<f32>, Array1<f32>), (Array1<f32>, Array1<f32>))>,
        pooling: Pooling,
        max_tokens: usize,
    ) -> Result<Self> {
        if config.dim == 0 || config.n_heads == 0 || config.dim % config.n_heads != 0 {
            return Err(Error::InvalidBackendSpec(
                "contextual asset: dim must be a positive multiple of n_heads".into(),
            ));
        }
        let lookup = vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect::<HashMap<_, _>>();
        for required in [CLS_TOKEN, SEP_TOKEN, UNK_TOKEN] {
            if !lookup.contains_key(required) {
                return Err(Error::InvalidBackendSpec(format!(
                    "contextual asset vocab lacks {required}"
                )));
            }
        }
        let mut layers = Vec::with_capacity(config.n_layers);
        for (mats, (attn_ln, ffn_ln)) in layer_tensors.into_iter().zip(layer_norms) {
            let mut it = mats.into_iter();
            let (wq, bq) = it.next().unwrap();
            let (wk, bk) = it.next().unwrap();
            let (wv, bv) = it.next().unwrap();
            let (wo, bo) = it.next().unwrap();
            let (w1, b1) = it.next().unwrap();
            let (w2, b2) = it.next().unwrap();
            layers.push(EncoderLayer {
                wq,
                bq,
                wk,
                bk,
                wv,
                bv,
                wo,
                bo,
                attn_ln,
                w1,
                b1,
                w2,
                b2,
                ffn_ln,
            });
        }
        Ok(ContextualEncoder {
            config,
            vocab,
            lookup,
            word_emb,
            pos_emb,
            emb_ln,
            layers,
            pooling,
            max_tokens,
        })
    }

    pub fn dimension(&self) -> usize {
        self.config.dim
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        crate::corpus::write_json(&dir.join("config.json"), &self.config)?;
        std::fs::write(dir.join("vocab.txt"), self.vocab.join("\n") + "\n")
            .map_err(|e| Error::io(dir.join("vocab.txt"), e))?;

        let mut tensors: Vec<(String, Vec<usize>, Vec<f32>)> = Vec::new();
        let push2 = |t: &mut Vec<(String, Vec<usize>, Vec<f32>)>, name: String, a: &Array2<f32>| {
            t.push((name, a.shape().to_vec(), a.iter().cloned().collect()));
        };
        let push1 = |t: &mut Vec<(String, Vec<usize>, Vec<f32>)>, name: String, a: &Array1<f32>| {
            t.push((name, vec![a.len()], a.to_vec()));
        };
        push2(&mut tensors, "embeddings.word".into(), &self.word_emb);
        push2(&mut tensors, "embeddings.position".into(), &self.pos_emb);
        push1(&mut tensors, "embeddings.ln.gamma".into(), &self.emb_ln.0);
        push1(&mut tensors, "embeddings.ln.beta".into(), &self.emb_ln.1);
        for (i, l) in self.layers.iter().enumerate() {
            push2(&mut tensors, format!("layer{i}.attn.wq"), &l.wq);
            push1(&mut tensors, format!("layer{i}.attn.bq"), &l.bq);
            push2(&mut tensors, format!("layer{i}.attn.wk"), &l.wk);
            push1(&mut tensors, format!("layer{i}.attn.bk"), &l.bk);
            push2(&mut tensors, format!("layer{i}.attn.wv"), &l.wv);
            push1(&mut tensors, format!("layer{i}.attn.bv"), &l.bv);
            push2(&mut tensors, format!("layer{i}.attn.wo"), &l.wo);
            push1(&mut tensors, format!("layer{i}.attn.bo"), &l.bo);
            push1(&mut tensors, format!("layer{i}.attn_ln.gamma"), &l.attn_ln.0);
            push1(&mut tensors, format!("layer{i}.attn_ln.beta"), &l.attn_ln.1);
            push2(&mut tensors, format!("layer{i}.ffn.w1"), &l.w1);
            push1(&mut tensors, format!("layer{i}.ffn.b1"), &l.b1);
            push2(&mut tensors, format!("layer{i}.ffn.w2"), &l.w2);
            push1(&mut tensors, format!("layer{i}.ffn.b2"), &l.b2);
            push1(&mut tensors, format!("layer{i}.ffn_ln.gamma"), &l.ffn_ln.0);
            push1(&mut tensors, format!("layer{i}.ffn_ln.beta"), &l.ffn_ln.1);
        }
        tensor_io::save_tensors(&dir.join("weights.safetensors"), &tensors)
    }

    pub fn load(dir: &Path, pooling: Pooling, max_tokens: usize) -> Result<Self> {
        let asset_err = |reason: String| Error::Asset {
            path: dir.to_path_buf(),
            reason,
        };
        let config_path = dir.join("config.json");
        if !config_path.exists() {
            return Err(asset_err("config.json not found".into()));
        }
        let config: ContextualAssetConfig = crate::corpus::read_json(&config_path)?;
        let vocab_raw = std::fs::read_to_string(dir.join("vocab.txt"))
            .map_err(|e| Error::io(dir.join("vocab.txt"), e))?;
        let vocab: Vec<String> = vocab_raw.lines().map(|l| l.to_string()).collect();

        let mut t = tensor_io::load_tensors(&dir.join("weights.safetensors"))?;
        let d = config.dim;
        let grab2 = |t: &mut std::collections::BTreeMap<String, (Vec<usize>, Vec<f32>)>,
                     name: String,
                     rows: usize,
                     cols: usize|
         -> Result<Array2<f32>> {
            let v = tensor_io::take_tensor(t, &name, &[rows, cols])?;
            Ok(Array2::from_shape_vec((rows, cols), v).expect("shape checked"))
        };
        let grab1 = |t: &mut std::collections::BTreeMap<String, (Vec<usize>, Vec<f32>)>,
                     name: String,
                     len: usize|
         -> Result<Array1<f32>> {
            Ok(Array1::from_vec(tensor_io::take_tensor(t, &name, &[len])?))
        };

        let word_emb = grab2(&mut t, "embeddings.word".into(), vocab.len(), d)?;
        let pos_emb = grab2(&mut t, "embeddings.position".into(), config.max_position, d)?;
        let emb_ln = (
            grab1(&mut t, "embeddings.ln.gamma".into(), d)?,
            grab1(&mut t, "embeddings.ln.beta".into(), d)?,
        );
        let mut layer_tensors = Vec::new();
        let mut layer_norms = Vec::new();
        for i in 0..config.n_layers {
            let mats = vec![
                (
                    grab2(&mut t, format!("layer{i}.attn.wq"), d, d)?,
                    grab1(&mut t, format!("layer{i}.attn.bq"), d)?,
                ),
                (
                    grab2(&mut t, format!("layer{i}.attn.wk"), d, d)?,
                    grab1(&mut t, format!("layer{i}.attn.bk"), d)?,
                ),
                (
                    grab2(&mut t, format!("layer{i}.attn.wv"), d, d)?,
                    grab1(&mut t, format!("layer{i}.attn.bv"), d)?,
                ),
                (
                    grab2(&mut t, format!("layer{i}.attn.wo"), d, d)?,
                    grab1(&mut t, format!("layer{i}.attn.bo"), d)?,
                ),
                (
                    grab2(&mut t, format!("layer{i}.ffn.w1"), d, config.ffn_dim)?,
                    grab1(&mut t, format!("layer{i}.ffn.b1"), config.ffn_dim)?,
                ),
                (
                    grab2(&mut t, format!("layer{i}.ffn.w2"), config.ffn_dim, d)?,
                    grab1(&mut t, format!("layer{i}.ffn.b2"), d)?,
                ),
            ];
            layer_norms.push((
                (
                    grab1(&mut t, format!("layer{i}.attn_ln.gamma"), d)?,
                    grab1(&mut t, format!("layer{i}.attn_ln.beta"), d)?,
                ),
                (
                    grab1(&mut t, format!("layer{i}.ffn_ln.gamma"), d)?,
                    grab1(&mut t, format!("layer{i}.ffn_ln.beta"), d)?,
                ),
            ));
            layer_tensors.push(mats);
        }
        Self::from_parts(
            config,
            vocab,
            word_emb,
            pos_emb,
            emb_ln,
            layer_tensors,
            layer_norms,
            pooling,
            max_tokens,
        )
        .map_err(|e| asset_err(e.to_string()))
    }

    /// Greedy longest-match WordPiece over one whitespace word.
    fn wordpiece(&self, word: &str, out: &mut Vec<usize>) {
        let chars: Vec<char> = word.chars().collect();
        let unk = self.lookup[UNK_TOKEN];
        let mut start = 0;
        let mut pieces = Vec::new();
        while start < chars.len() {
            let mut end = chars.len();
            let mut found = None;
            while end > start {
                let piece: String = chars[start..end].iter().collect();
                let candidate = if start == 0 { piece } else { format!("##{piece}") };
                if let Some(&id) = self.lookup.get(&candidate) {
                    found = Some(id);
                    break;
                }
                end -= 1;
            }
            match found {
                Some(id) => {
                    pieces.push(id);
                    start = end;
                }
                None => {
                    // unknown word: single UNK for the whole word
                    out.push(unk);
                    return;
                }
            }
        }
        out.extend(pieces);
    }

    /// Tokenize cleaned text into encoder input ids: [CLS] pieces [SEP],
    /// pieces truncated so the sequence fits both `max_tokens` and the
    /// asset's position table.
    pub fn encode_ids(&self, text: &str) -> Vec<usize> {
        let limit = self.max_tokens.min(self.config.max_position);
        let mut ids = vec![self.lookup[CLS_TOKEN]];
        for word in tokenize(text) {
            self.wordpiece(word, &mut ids);
        }
        ids.truncate(limit.saturating_sub(1).max(1));
        ids.push(self.lookup[SEP_TOKEN]);
        ids
    }

    fn encoder_forward(&self, ids: &[usize]) -> Array2<f32> {
        let d = self.config.dim;
        let len = ids.len();
        let mut x = Array2::zeros((len, d));
        for (pos, &id) in ids.iter().enumerate() {
            let row = &self.word_emb.row(id) + &self.pos_emb.row(pos);
            x.row_mut(pos).assign(&row);
        }
        layer_norm(&mut x, &self.emb_ln.0, &self.emb_ln.1, self.config.layer_norm_eps);

        let heads = self.config.n_heads;
        let dh = d / heads;
        let scale = 1.0 / (dh as f32).sqrt();
        for layer in &self.layers {
            let q = x.dot(&layer.wq) + &layer.bq;
            let k = x.dot(&layer.wk) + &layer.bk;
            let v = x.dot(&layer.wv) + &layer.bv;
            let mut ctx = Array2::zeros((len, d));
            for h in 0..heads {
                let cols = s![.., h * dh..(h + 1) * dh];
                let qh = q.slice(cols);
                let kh = k.slice(cols);
                let vh = v.slice(cols);
                let mut scores = qh.dot(&kh.t());
                scores *= scale;
                softmax_rows(&mut scores);
                ctx.slice_mut(cols).assign(&scores.dot(&vh));
            }
            let attn_out = ctx.dot(&layer.wo) + &layer.bo;
            x += &attn_out;
            layer_norm(&mut x, &layer.attn_ln.0, &layer.attn_ln.1, self.config.layer_norm_eps);

            let hidden = (x.dot(&layer.w1) + &layer.b1).mapv(gelu);
            let ffn_out = hidden.dot(&layer.w2) + &layer.b2;
            x += &ffn_out;
            layer_norm(&mut x, &layer.ffn_ln.0, &layer.ffn_ln.1, self.config.layer_norm_eps);
        }
        x
    }

    /// Pooled document embedding; zero vector for empty text.
    pub fn embed(&self, text: &str) -> Result<Vec<f64>> {
        if tokenize(text).is_empty() {
            return Ok(vec![0.0; self.config.dim]);
        }
        let ids = self.encode_ids(text);
        let hidden = self.encoder_forward(&ids);
        let pooled: Array1<f32> = match self.pooling {
            Pooling::Mean => hidden.mean_axis(Axis(0)).expect("non-empty sequence"),
            Pooling::FirstToken => hidden.row(0).to_owned(),
        };
        Ok(pooled.iter().map(|&v| v as f64).collect())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Small deterministic encoder for tests: 2 layers, 2 heads, dim 16.
    pub(crate) fn toy_encoder(pooling: Pooling, max_tokens: usize, seed: u64) -> ContextualEncoder {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 16;
        let ffn = 32;
        let vocab: Vec<String> = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "ভালো", "মন", "##লো", "ভা", "দিন"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let config = ContextualAssetConfig {
            dim,
            n_layers: 2,
            n_heads: 2,
            ffn_dim: ffn,
            max_position: 32,
            layer_norm_eps: 1e-12,
        };
        let mut mat = |r: usize, c: usize| {
            Array2::from_shape_fn((r, c), |_| rng.random_range(-0.2f32..0.2))
        };
        let word_emb = mat(vocab.len(), dim);
        let pos_emb = mat(config.max_position, dim);
        let ones = Array1::ones(dim);
        let zeros = Array1::zeros(dim);
        let mut layer_tensors = Vec::new();
        let mut layer_norms = Vec::new();
        for _ in 0..config.n_layers {
            layer_tensors.push(vec![
                (mat(dim, dim), Array1::zeros(dim)),
                (mat(dim, dim), Array1::zeros(dim)),
                (mat(dim, dim), Array1::zeros(dim)),
                (mat(dim, dim), Array1::zeros(dim)),
                (mat(dim, ffn), Array1::zeros(ffn)),
                (mat(ffn, dim), Array1::zeros(dim)),
            ]);
            layer_norms.push((
                (ones.clone(), zeros.clone()),
                (ones.clone(), zeros.clone()),
            ));
        }
        ContextualEncoder::from_parts(
            config,
            vocab,
            word_emb,
            pos_emb,
            (ones, zeros),
            layer_tensors,
            layer_norms,
            pooling,
            max_tokens,
        )
        .unwrap()
    }

    #[test]
    fn wordpiece_longest_match_and_unk() {
        let enc = toy_encoder(Pooling::Mean, 16, 1);
        // "ভালো" is in vocab directly
        let ids = enc.encode_ids("ভালো");
        assert_eq!(ids.len(), 3); // CLS + piece + SEP
        // unknown word collapses to UNK
        let ids = enc.encode_ids("xyzঅচেনা");
        assert_eq!(ids[1], 1);
    }

    #[test]
    fn truncation_respects_max_tokens() {
        let enc = toy_encoder(Pooling::Mean, 6, 1);
        let long_text = vec!["ভালো"; 50].join(" ");
        let ids = enc.encode_ids(&long_text);
        assert!(ids.len() <= 6, "len {}", ids.len());
        assert_eq!(*ids.last().unwrap(), 3); // SEP
        assert_eq!(ids[0], 2); // CLS
    }

    #[test]
    fn embedding_is_deterministic_and_finite() {
        let enc = toy_encoder(Pooling::Mean, 16, 2);
        let a = enc.embed("ভালো মন দিন").unwrap();
        let b = enc.embed("ভালো মন দিন").unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|v| v.is_finite()));
        assert_eq!(a.len(), 16);
    }

    #[test]
    fn empty_text_is_zero_vector() {
        let enc = toy_encoder(Pooling::Mean, 16, 2);
        assert!(enc.embed("").unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pooling_modes_differ() {
        let mean = toy_encoder(Pooling::Mean, 16, 3);
        let first = toy_encoder(Pooling::FirstToken, 16, 3);
        let a = mean.embed("ভালো দিন").unwrap();
        let b = first.embed("ভালো দিন").unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn save_load_roundtrip_preserves_embeddings() {
        let enc = toy_encoder(Pooling::Mean, 16, 4);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ctx");
        enc.save(&path).unwrap();
        let loaded = ContextualEncoder::load(&path, Pooling::Mean, 16).unwrap();
        assert_eq!(loaded.embed("ভালো মন").unwrap(), enc.embed("ভালো মন").unwrap());
    }

    #[test]
    fn missing_asset_reports_path() {
        let dir = tempfile::tempdir().unwrap();
        let err = ContextualEncoder::load(&dir.path().join("absent"), Pooling::Mean, 8).unwrap_err();
        assert!(matches!(err, Error::Asset { .. }), "{err}");
    }
}
