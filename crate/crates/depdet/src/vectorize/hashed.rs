//! Deterministic asset-free backend for offline tests.
//!
//! Each token is mapped by a fixed hash of its bytes to a unit vector in
//! R^D; a document embeds as the mean of its token vectors. No fitting, no
//! downloads, bit-identical across runs and platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use crate::preprocess::tokenize;

/// Domain-separation constant so token vectors differ from any other
/// sha256-derived stream in the crate.
const HASH_TAG: &[u8] = b"depdet.hashed.v1";

#[derive(Debug, Clone)]
pub struct HashedBackend {
    dimension: usize,
}

impl HashedBackend {
    pub fn new(dimension: usize) -> Self {
        HashedBackend { dimension }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    fn token_vector(&self, token: &str) -> Vec<f64> {
        let mut hasher = Sha256::new();
        hasher.update(HASH_TAG);
        hasher.update(token.as_bytes());
        let digest = hasher.finalize();
        let seed = u64::from_le_bytes(digest[..8].try_into().unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..self.dimension)
            .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        }
        v
    }

    /// Mean of token unit vectors; zero vector for empty text.
    pub fn embed(&self, text: &str) -> Vec<f64> {
        let tokens = tokenize(text);
        let mut out = vec![0.0; self.dimension];
        if tokens.is_empty() {
            return out;
        }
        for t in &tokens {
            for (o, v) in out.iter_mut().zip(self.token_vector(t)) {
                *o += v;
            }
        }
        let n = tokens.len() as f64;
        for o in &mut out {
            *o /= n;
        }
        out
    }
}
