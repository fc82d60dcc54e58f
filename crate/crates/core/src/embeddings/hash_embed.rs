//! Hash-based stand-in for a transformer encoder.
//!
//! Each whitespace token contributes a pseudo-random direction derived from
//! FNV-1a over `(seed, side tag, lowercased token)` and expanded with
//! splitmix64. The sum of all token directions is L2-normalised. Output
//! depends only on the arguments.

use super::{EmbeddingError, EmbeddingVector, EMBEDDING_DIM};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(parts: &[&[u8]]) -> u64 {
    let mut hash = FNV_OFFSET;
    for part in parts {
        for &b in *part {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(FNV_PRIME);
        }
    }
    hash
}

struct SplitMix64(u64);

impl SplitMix64 {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [-1, 1).
    fn next_signed_unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 * (2.0 / (1u64 << 53) as f64) - 1.0
    }
}

fn accumulate(acc: &mut [f64], sentence: &str, tag: u8, seed: u64) {
    let seed_bytes = seed.to_le_bytes();
    for token in sentence.split_whitespace() {
        let token = token.to_lowercase();
        let mut rng = SplitMix64(fnv1a(&[&seed_bytes, &[tag], token.as_bytes()]));
        for slot in acc.iter_mut() {
            *slot += rng.next_signed_unit();
        }
    }
}

/// Embeds the sentence pair `(a, b)` as a unit-norm 768-dim vector.
/// Sentence A may be empty; sentence B may not.
pub fn deterministic_embed(
    sentence_a: &str,
    sentence_b: &str,
    seed: u64,
) -> Result<EmbeddingVector, EmbeddingError> {
    if sentence_b.trim().is_empty() {
        return Err(EmbeddingError::EmptySentence);
    }
    let mut acc = vec![0f64; EMBEDDING_DIM];
    accumulate(&mut acc, sentence_a, b'a', seed);
    accumulate(&mut acc, sentence_b, b'b', seed);
    let norm = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
    // A zero sum of random directions has probability zero; keep the output finite anyway.
    let scale = if norm > 0.0 { 1.0 / norm } else { 0.0 };
    EmbeddingVector::new(acc.iter().map(|v| (v * scale) as f32).collect())
}
