//! Segment encoders map one text segment (an article body or one frame
//! element) to a fixed-dimension vector.
//!
//! A sample is always encoded as five segments in a fixed order: the article
//! body, then problem definition, causal interpretation, moral evaluation and
//! treatment recommendation. Absent or masked segments are replaced by the
//! encoder's *empty-segment embedding* (the encoding of an empty token
//! sequence) so their position is never dropped.

mod hashing;
#[cfg(feature = "transformer")]
mod transformer;

pub use hashing::HashingEncoder;
#[cfg(feature = "transformer")]
pub use transformer::{Pooling, TransformerEncoder};

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{FrameElement, LabeledSample};

/// Number of segments per sample: the article plus four elements.
pub const SEGMENTS: usize = 5;

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error("encoder backend failure: {0}")]
    Backend(String),
    #[error("segment {index}: {source}")]
    Segment {
        index: usize,
        #[source]
        source: Box<EncoderError>,
    },
    #[error("invalid encoder configuration: {0}")]
    Config(String),
}

pub trait Tokenizer {
    fn tokenize(&self, text: &str) -> Result<Vec<String>, EncoderError>;
}

/// Deterministic in inference mode; `encode_tokens` always returns `dim()`
/// values.
pub trait SegmentEncoder: Tokenizer + Send + Sync {
    fn dim(&self) -> usize;

    /// Hard limit on content tokens accepted by `encode_tokens`.
    fn max_tokens(&self) -> usize;

    fn encode_tokens(&self, tokens: &[String]) -> Result<Vec<f64>, EncoderError>;

    /// Serializable description sufficient to rebuild this encoder.
    fn spec(&self) -> EncoderSpec;

    fn empty_embedding(&self) -> Result<Vec<f64>, EncoderError> {
        self.encode_tokens(&[])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationStrategy {
    Head,
    Tail,
    HeadAndTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub strategy: TruncationStrategy,
    pub max_tokens: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            strategy: TruncationStrategy::Head,
            max_tokens: 512,
        }
    }
}

impl TruncationPolicy {
    pub fn head(max_tokens: usize) -> Self {
        TruncationPolicy {
            strategy: TruncationStrategy::Head,
            max_tokens,
        }
    }

    /// Returns at most `max_tokens` tokens. Head-and-tail keeps the extra
    /// token (for odd limits) at the head.
    pub fn apply<'a>(&self, tokens: &'a [String]) -> std::borrow::Cow<'a, [String]> {
        use std::borrow::Cow;
        let max = self.max_tokens;
        if tokens.len() <= max {
            return Cow::Borrowed(tokens);
        }
        match self.strategy {
            TruncationStrategy::Head => Cow::Borrowed(&tokens[..max]),
            TruncationStrategy::Tail => Cow::Borrowed(&tokens[tokens.len() - max..]),
            TruncationStrategy::HeadAndTail => {
                let head = max.div_ceil(2);
                let tail = max - head;
                let mut out = tokens[..head].to_vec();
                out.extend_from_slice(&tokens[tokens.len() - tail..]);
                Cow::Owned(out)
            }
        }
    }
}

/// One encoded segment with its bookkeeping flags.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentEmbedding {
    pub vector: Vec<f64>,
    /// True when the segment was empty, absent or masked.
    pub empty: bool,
    /// Tokens actually fed to the encoder.
    pub input_tokens: usize,
    pub truncated: bool,
}

/// Encodes one segment. `None` and blank text both yield the empty-segment
/// embedding.
pub fn encode_segment(
    encoder: &dyn SegmentEncoder,
    text: Option<&str>,
    policy: &TruncationPolicy,
) -> Result<SegmentEmbedding, EncoderError> {
    let tokens = match text {
        Some(t) if !t.trim().is_empty() => encoder.tokenize(t)?,
        _ => Vec::new(),
    };
    let limit = TruncationPolicy {
        max_tokens: policy.max_tokens.min(encoder.max_tokens()),
        ..*policy
    };
    let kept = limit.apply(&tokens);
    let vector = encoder.encode_tokens(&kept)?;
    if vector.len() != encoder.dim() {
        return Err(EncoderError::Backend(format!(
            "encoder returned {} values, expected {}",
            vector.len(),
            encoder.dim()
        )));
    }
    Ok(SegmentEmbedding {
        vector,
        empty: kept.is_empty(),
        input_tokens: kept.len(),
        truncated: kept.len() < tokens.len(),
    })
}

/// Which of the five segments feed the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ElementMask(pub [bool; SEGMENTS]);

impl ElementMask {
    pub const ARTICLE: usize = 0;

    pub fn all() -> Self {
        ElementMask([true; SEGMENTS])
    }

    pub fn text_only() -> Self {
        ElementMask([true, false, false, false, false])
    }

    pub fn frames_only() -> Self {
        ElementMask([false, true, true, true, true])
    }

    pub fn without(mut self, element: FrameElement) -> Self {
        self.0[segment_index(element)] = false;
        self
    }

    pub fn includes(&self, segment: usize) -> bool {
        self.0[segment]
    }

    pub fn includes_article(&self) -> bool {
        self.0[Self::ARTICLE]
    }
}

impl Default for ElementMask {
    fn default() -> Self {
        Self::all()
    }
}

impl fmt::Display for ElementMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for on in self.0 {
            f.write_str(if on { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Segment position of an element (the article occupies position 0).
pub fn segment_index(element: FrameElement) -> usize {
    element.index() + 1
}

/// The five segments of one sample, in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSample {
    pub segments: Vec<SegmentEmbedding>,
}

impl EncodedSample {
    pub fn vectors(&self) -> Vec<&[f64]> {
        self.segments.iter().map(|s| s.vector.as_slice()).collect()
    }
}

/// Encodes article, e1..e4 in order. Masked-out positions get the
/// empty-segment embedding and are flagged empty.
pub fn encode_sample(
    encoder: &dyn SegmentEncoder,
    sample: &LabeledSample,
    policy: &TruncationPolicy,
    mask: &ElementMask,
) -> Result<EncodedSample, EncoderError> {
    let texts = std::iter::once(Some(sample.article.body.as_str()))
        .chain(FrameElement::ALL.iter().map(|&e| sample.elements.get(e)));
    let mut segments = Vec::with_capacity(SEGMENTS);
    for (index, text) in texts.enumerate() {
        let text = if mask.includes(index) { text } else { None };
        let seg = encode_segment(encoder, text, policy).map_err(|e| EncoderError::Segment {
            index,
            source: Box::new(e),
        })?;
        segments.push(seg);
    }
    Ok(EncodedSample { segments })
}

/// Serializable encoder selection, stored in checkpoints and run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
pub enum EncoderSpec {
    Hashing {
        dim: usize,
        #[serde(default = "default_max_tokens")]
        max_tokens: usize,
    },
    /// A pretrained BERT-family model directory (`config.json`,
    /// `model.safetensors`, `tokenizer.json`) named `model` under the cache
    /// directory given by `FEMKIT_ENCODER_CACHE` (or an absolute path).
    Transformer {
        model: String,
        #[serde(default)]
        mean_pooling: bool,
        #[serde(default = "default_max_tokens")]
        max_tokens: usize,
    },
}

fn default_max_tokens() -> usize {
    512
}

pub const ENCODER_CACHE_ENV: &str = "FEMKIT_ENCODER_CACHE";

impl EncoderSpec {
    pub fn build(&self) -> Result<Arc<dyn SegmentEncoder>, EncoderError> {
        match self {
            EncoderSpec::Hashing { dim, max_tokens } => {
                if *dim == 0 || *max_tokens == 0 {
                    return Err(EncoderError::Config("dim and max_tokens must be positive".into()));
                }
                Ok(Arc::new(HashingEncoder::new(*dim).with_max_tokens(*max_tokens)))
            }
            #[cfg(feature = "transformer")]
            EncoderSpec::Transformer {
                model,
                mean_pooling,
                max_tokens,
            } => {
                let dir = resolve_model_dir(model);
                let pooling = if *mean_pooling {
                    Pooling::Mean
                } else {
                    Pooling::SequenceStart
                };
                Ok(Arc::new(TransformerEncoder::load(&dir, model, pooling, *max_tokens)?))
            }
            #[cfg(not(feature = "transformer"))]
            EncoderSpec::Transformer { .. } => Err(EncoderError::Config(
                "transformer encoders need the `transformer` cargo feature".into(),
            )),
        }
    }
}

#[cfg_attr(not(feature = "transformer"), allow(dead_code))]
fn resolve_model_dir(model: &str) -> std::path::PathBuf {
    let path = std::path::Path::new(model);
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(ENCODER_CACHE_ENV) {
        Some(root) => std::path::PathBuf::from(root).join(model),
        None => path.to_path_buf(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Article, FrameElementSet, Label, Provenance};

    fn toks(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("t{i}")).collect()
    }

    #[test]
    fn head_keeps_first_tokens() {
        let tokens = toks(10_000);
        let kept = TruncationPolicy::head(512).apply(&tokens);
        assert_eq!(kept.len(), 512);
        assert_eq!(&kept[..], &tokens[..512]);
    }

    #[test]
    fn tail_and_head_and_tail() {
        let tokens = toks(10);
        let tail = TruncationPolicy {
            strategy: TruncationStrategy::Tail,
            max_tokens: 3,
        };
        assert_eq!(&tail.apply(&tokens)[..], &tokens[7..]);
        let both = TruncationPolicy {
            strategy: TruncationStrategy::HeadAndTail,
            max_tokens: 5,
        };
        let kept = both.apply(&tokens);
        assert_eq!(
            kept.iter().map(String::as_str).collect::<Vec<_>>(),
            ["t0", "t1", "t2", "t8", "t9"]
        );
    }

    #[test]
    fn long_text_is_truncated_to_the_first_tokens() {
        let enc = HashingEncoder::new(8).with_max_tokens(100_000);
        let text = (0..10_000).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        let head: String = (0..512).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        let seg = encode_segment(&enc, Some(&text), &TruncationPolicy::head(512)).unwrap();
        assert_eq!(seg.input_tokens, 512);
        assert!(seg.truncated);
        let direct = encode_segment(&enc, Some(&head), &TruncationPolicy::head(512)).unwrap();
        assert_eq!(seg.vector, direct.vector);
    }

    #[test]
    fn encoder_limit_caps_policy() {
        let enc = HashingEncoder::new(4).with_max_tokens(3);
        let seg = encode_segment(&enc, Some("a b c d e"), &TruncationPolicy::head(512)).unwrap();
        assert_eq!(seg.input_tokens, 3);
    }

    #[test]
    fn empty_text_uses_empty_embedding() {
        let enc = HashingEncoder::new(8);
        let empty = enc.empty_embedding().unwrap();
        for text in [None, Some(""), Some("   ")] {
            let seg = encode_segment(&enc, text, &TruncationPolicy::default()).unwrap();
            assert!(seg.empty);
            assert_eq!(seg.vector, empty);
        }
    }

    fn full_sample() -> LabeledSample {
        LabeledSample::new(
            Article::new("s", "The council met."),
            FrameElementSet::from_texts([Some("p"), Some("c"), Some("m"), Some("t")]),
            Label::Information,
            Provenance::Original,
        )
    }

    #[test]
    fn all_present_gives_five_non_empty_segments() {
        let enc = HashingEncoder::new(8);
        let out = encode_sample(&enc, &full_sample(), &TruncationPolicy::default(), &ElementMask::all()).unwrap();
        assert_eq!(out.segments.len(), 5);
        assert!(out.segments.iter().all(|s| !s.empty));
    }

    #[test]
    fn absent_treatment_is_empty_at_index_four() {
        let enc = HashingEncoder::new(8);
        let mut sample = full_sample();
        sample.elements.set(FrameElement::TreatmentRecommendation, None);
        let out = encode_sample(&enc, &sample, &TruncationPolicy::default(), &ElementMask::all()).unwrap();
        assert!(out.segments[4].empty);
        assert_eq!(out.segments[4].vector, enc.empty_embedding().unwrap());
    }

    #[test]
    fn masking_moral_keeps_length_five() {
        let enc = HashingEncoder::new(8);
        let mask = ElementMask::all().without(FrameElement::MoralEvaluation);
        let out = encode_sample(&enc, &full_sample(), &TruncationPolicy::default(), &mask).unwrap();
        assert_eq!(out.segments.len(), 5);
        assert!(out.segments[3].empty);
        assert_eq!(out.segments[3].vector, enc.empty_embedding().unwrap());
        assert!(!out.segments[2].empty && !out.segments[4].empty);
    }

    #[test]
    fn mask_display_and_constructors() {
        assert_eq!(ElementMask::text_only().to_string(), "10000");
        assert_eq!(ElementMask::frames_only().to_string(), "01111");
        assert_eq!(
            ElementMask::all().without(FrameElement::ProblemDefinition).to_string(),
            "10111"
        );
    }

    #[cfg(not(feature = "transformer"))]
    #[test]
    fn transformer_spec_needs_feature() {
        let spec = EncoderSpec::Transformer {
            model: "bert".into(),
            mean_pooling: false,
            max_tokens: 512,
        };
        assert!(matches!(spec.build(), Err(EncoderError::Config(_))));
    }
}
