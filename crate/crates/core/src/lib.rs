//! Frame-element misinformation detection.
//!
//! A news article and the four framing elements extracted from it (problem
//! definition, causal interpretation, moral evaluation, treatment
//! recommendation) are encoded separately, fused by a bidirectional LSTM
//! and classified as information or misinformation.
//!
//! - [`corpus`]: data model, JSONL persistence, stratified splits.
//! - [`augmentation`]: builds paired corpora through a text-completion client.
//! - [`encoder`]: segment encoders (deterministic hashing; pretrained
//!   transformers behind the `transformer` feature).
//! - [`fem`]: the fusion network, training and checkpoints.
//! - [`evalkit`]: metrics, ablations, similarity analysis and reports.
//!
//! ```
//! use std::sync::Arc;
//! use femkit::corpus::{Article, FrameElementSet, Label, LabeledSample, Provenance};
//! use femkit::encoder::{ElementMask, HashingEncoder};
//! use femkit::fem::{FemConfig, FemModel};
//!
//! let config = FemConfig { hidden_size: 8, ..FemConfig::new(42) };
//! let model = FemModel::init(Arc::new(HashingEncoder::new(16)), &config);
//! let sample = LabeledSample::new(
//!     Article::new("a1", "The council approved the new water plan."),
//!     FrameElementSet::from_texts([Some("Ageing pipes"), None, None, None]),
//!     Label::Information,
//!     Provenance::External,
//! );
//! let p = model.probabilities(&sample, &ElementMask::all()).unwrap();
//! assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
//! ```

pub mod augmentation;
pub mod corpus;
pub mod encoder;
pub mod evalkit;
pub mod fem;
pub mod synthetic;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/augmentation.md")]
    mod augmentation {}
    #[doc = include_str!("../../../book/src/encoding.md")]
    mod encoding {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
