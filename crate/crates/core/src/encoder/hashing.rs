use sha2::{Digest, Sha256};

use super::{EncoderError, EncoderSpec, SegmentEncoder, Tokenizer};

const SEQUENCE_START: &str = "[CLS]";

/// Deterministic bag-of-words encoder for tests and offline runs.
///
/// Each token maps to a pseudo-random vector in [-1, 1)^d derived from
/// SHA-256 of the token; dimension `j` reads the `j % 4`-th little-endian
/// u64 of `sha256(token ‖ 0x00 ‖ u32_le(j / 4))` and keeps its top 53 bits.
/// A segment is the sum of its token vectors plus a sequence-start vector,
/// scaled by `1/sqrt(n + 1)`. The empty segment is therefore the
/// sequence-start vector alone.
#[derive(Debug, Clone, PartialEq)]
pub struct HashingEncoder {
    dim: usize,
    max_tokens: usize,
}

impl HashingEncoder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        HashingEncoder { dim, max_tokens: 512 }
    }

    pub fn with_max_tokens(mut self, max_tokens: usize) -> Self {
        assert!(max_tokens > 0, "max_tokens must be positive");
        self.max_tokens = max_tokens;
        self
    }

    fn accumulate(&self, token: &str, acc: &mut [f64]) {
        let mut block = usize::MAX;
        let mut digest = [0u8; 32];
        for (j, slot) in acc.iter_mut().enumerate() {
            if j / 4 != block {
                block = j / 4;
                let mut h = Sha256::new();
                h.update(token.as_bytes());
                h.update([0u8]);
                h.update((block as u32).to_le_bytes());
                digest.copy_from_slice(&h.finalize());
            }
            let off = 8 * (j % 4);
            let x = u64::from_le_bytes(digest[off..off + 8].try_into().unwrap());
            *slot += (x >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
        }
    }
}

impl Tokenizer for HashingEncoder {
    /// Lowercased runs of alphanumeric characters.
    fn tokenize(&self, text: &str) -> Result<Vec<String>, EncoderError> {
        Ok(text
            .to_lowercase()
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect())
    }
}

impl SegmentEncoder for HashingEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn max_tokens(&self) -> usize {
        self.max_tokens
    }

    fn encode_tokens(&self, tokens: &[String]) -> Result<Vec<f64>, EncoderError> {
        let mut v = vec![0.0; self.dim];
        self.accumulate(SEQUENCE_START, &mut v);
        for t in tokens {
            self.accumulate(t, &mut v);
        }
        let scale = ((tokens.len() + 1) as f64).sqrt();
        v.iter_mut().for_each(|x| *x /= scale);
        Ok(v)
    }

    fn spec(&self) -> EncoderSpec {
        EncoderSpec::Hashing {
            dim: self.dim,
            max_tokens: self.max_tokens,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{encode_segment, TruncationPolicy};

    // Frozen from an independent Python evaluation of the hashing rule.
    const A: [f64; 8] = [
        0.010285568074396543,
        -0.07488255299357144,
        0.27644244259919315,
        -0.5915291301453707,
        1.1189455688486682,
        -0.7087537744011092,
        0.6152088351608486,
        0.20596105204470844,
    ];
    const B: [f64; 8] = [
        -0.9160773831577687,
        0.5662377570912794,
        0.25376199916564984,
        0.269173034369486,
        -0.2693690919624794,
        0.5612818883589474,
        0.15643049608522835,
        -0.1342784552922525,
    ];
    const EMPTY: [f64; 8] = [
        -0.9075602617537999,
        0.8421060005434786,
        -0.20275239673771916,
        -0.17759191908328797,
        0.5893335870866103,
        -0.11778790201727007,
        0.8347291344775065,
        0.26720606655078294,
    ];

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15)
    }

    #[test]
    fn frozen_vectors_for_a_and_b() {
        let enc = HashingEncoder::new(8);
        let p = TruncationPolicy::default();
        let a = encode_segment(&enc, Some("a"), &p).unwrap().vector;
        let b = encode_segment(&enc, Some("b"), &p).unwrap().vector;
        assert!(close(&a, &A), "{a:?}");
        assert!(close(&b, &B), "{b:?}");
        assert_ne!(a, b);
        assert!(close(&enc.empty_embedding().unwrap(), &EMPTY));
    }

    #[test]
    fn same_text_twice_is_identical() {
        let enc = HashingEncoder::new(16);
        let p = TruncationPolicy::default();
        let x = encode_segment(&enc, Some("Three waters reform"), &p).unwrap();
        let y = encode_segment(&enc, Some("Three waters reform"), &p).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn tokenizer_lowercases_and_splits_punctuation() {
        let enc = HashingEncoder::new(4);
        assert_eq!(enc.tokenize("Oh, boy! Ça va?").unwrap(), ["oh", "boy", "ça", "va"]);
    }
}
