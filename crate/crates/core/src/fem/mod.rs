//! The frame element-based model: five segment embeddings (article, then the
//! four framing elements) are read as a length-5 sequence by a bidirectional
//! LSTM; the ReLU of its final states feeds dropout, an affine map to two
//! logits and a softmax.
//!
//! Class index 0 is misinformation (label 0), index 1 information (label 1).

mod checkpoint;
mod config;
mod loss;
mod network;
mod optim;
mod schedule;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, write_history_csv, CheckpointMeta};
pub use config::FemConfig;
pub use loss::{binary_cross_entropy, loss};
pub use network::{softmax2, FemNetwork, FemParams, ForwardTrace, LstmDirection, PROB_EPSILON};
pub use optim::OptimizerConfig;
pub use schedule::{lr_at, Schedule};
pub use train::{train, EpochRecord, TrainHistory, TrainOutcome};

use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::corpus::{Label, LabeledSample};
use crate::encoder::{encode_sample, ElementMask, EncodedSample, EncoderError, SegmentEncoder, TruncationPolicy};

#[derive(Debug, Error)]
pub enum FemError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("step {step} outside 0..={total_steps}")]
    StepOutOfRange { step: usize, total_steps: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("training split is empty")]
    EmptyTrainSplit,
    #[error("validation split is empty")]
    EmptyValidationSplit,
    #[error("loss became non-finite in epoch {epoch}")]
    Diverged {
        epoch: usize,
        /// Model after the last epoch that finished with finite loss.
        checkpoint: Box<FemModel>,
        history: TrainHistory,
    },
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// A network bound to the segment encoder and truncation policy it was
/// trained with. Immutable once built; safe to share across threads.
#[derive(Clone)]
pub struct FemModel {
    pub encoder: Arc<dyn SegmentEncoder>,
    pub network: FemNetwork,
    pub truncation: TruncationPolicy,
}

impl std::fmt::Debug for FemModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FemModel")
            .field("encoder", &self.encoder.spec())
            .field("input_dim", &self.network.input_dim())
            .field("hidden_size", &self.network.hidden_size())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label_hat: Label,
    pub p_misinfo: f64,
}

/// Arg-max with ties resolved to misinformation.
pub fn decide(probabilities: [f64; 2]) -> Prediction {
    let p_misinfo = probabilities[Label::Misinformation.as_index()];
    let label_hat = if p_misinfo >= probabilities[Label::Information.as_index()] {
        Label::Misinformation
    } else {
        Label::Information
    };
    Prediction { label_hat, p_misinfo }
}

impl FemModel {
    /// Freshly initialized model; weights drawn from `seed`.
    pub fn init(encoder: Arc<dyn SegmentEncoder>, config: &FemConfig) -> Self {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
        let network = FemNetwork::new(encoder.dim(), config.hidden_size, config.dropout_rate, &mut rng);
        FemModel {
            encoder,
            network,
            truncation: config.truncation,
        }
    }

    pub fn encode(&self, sample: &LabeledSample, mask: &ElementMask) -> Result<EncodedSample, EncoderError> {
        encode_sample(self.encoder.as_ref(), sample, &self.truncation, mask)
    }

    /// Class probabilities for pre-encoded segments. Dropout is applied only
    /// when `training` is true, drawing masks from `rng`.
    pub fn forward<R: Rng>(&self, segments: &[&[f64]], training: bool, rng: &mut R) -> Result<[f64; 2], FemError> {
        let dropout = if training { Some(rng) } else { None };
        Ok(self.network.trace(segments, dropout)?.probabilities)
    }

    pub fn probabilities(&self, sample: &LabeledSample, mask: &ElementMask) -> Result<[f64; 2], FemError> {
        let encoded = self.encode(sample, mask)?;
        self.network.probabilities(&encoded.vectors())
    }

    pub fn predict(&self, sample: &LabeledSample, mask: &ElementMask) -> Result<Prediction, FemError> {
        Ok(decide(self.probabilities(sample, mask)?))
    }

    /// The post-ReLU, pre-dropout BiLSTM state (length 2H) that feeds the
    /// classifier.
    pub fn hidden_state(&self, sample: &LabeledSample, mask: &ElementMask) -> Result<Vec<f64>, FemError> {
        let encoded = self.encode(sample, mask)?;
        let trace = self
            .network
            .trace::<rand_chacha::ChaCha8Rng>(&encoded.vectors(), None)?;
        Ok(trace.hidden.to_vec())
    }
}
