use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

use super::CallCounter;
use crate::lexicon::DomainLexicon;
use crate::matcher::EmbeddingVector;
use crate::pipeline::{AgentError, Embedder};
use crate::text::words;

pub const DEFAULT_DIMENSION: usize = 384;

/// Bag-of-words projection: every non-stopword token maps to a fixed
/// pseudo-random direction seeded from its hash, and a text embeds to the sum
/// of its token directions. Texts sharing most tokens land close together;
/// texts with disjoint vocabulary are nearly orthogonal.
#[derive(Debug)]
pub struct HashedEmbedder {
    lexicon: DomainLexicon,
    dimension: usize,
    pub calls: CallCounter,
}

impl HashedEmbedder {
    pub fn new(lexicon: DomainLexicon, dimension: usize) -> Self {
        Self {
            lexicon,
            dimension: dimension.max(1),
            calls: CallCounter::default(),
        }
    }

    fn add_token(&self, acc: &mut [f64], token: &str) {
        let digest = Sha256::digest(token.as_bytes());
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        let mut rng = ChaCha8Rng::from_seed(seed);
        for v in acc.iter_mut() {
            *v += f64::from(rng.next_u32()) / f64::from(u32::MAX) * 2.0 - 1.0;
        }
    }

    /// Deterministic embedding; never the zero vector.
    pub fn vector(&self, text: &str) -> EmbeddingVector {
        let mut acc = vec![0.0f64; self.dimension];
        let mut any = false;
        for w in words(text) {
            if !self.lexicon.is_stopword(&w.lower) {
                self.add_token(&mut acc, &w.lower);
                any = true;
            }
        }
        if !any {
            self.add_token(&mut acc, "\u{0}empty");
        }
        if acc.iter().all(|v| *v == 0.0) {
            acc[0] = 1.0;
        }
        let values: Vec<f32> = acc.into_iter().map(|v| v as f32).collect();
        EmbeddingVector::new(values).expect("finite, non-empty")
    }
}

impl Embedder for HashedEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, AgentError> {
        self.calls.bump();
        Ok(self.vector(text))
    }
}
