use std::sync::Arc;

use log::{debug, info};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::optim::Adam;
use super::{decide, loss, FemConfig, FemError, FemModel};
use crate::corpus::{Corpus, Label};
use crate::encoder::{encode_sample, ElementMask, SegmentEncoder, TruncationPolicy};
use crate::evalkit::{metrics, ConfusionCounts};

/// One epoch's validation-split measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean training objective over the epoch's batches.
    pub train_loss: f64,
    /// Validation loss.
    pub loss: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Learning rate of the epoch's last update.
    pub lr: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Learning rate of every update, in order.
    pub lr_trace: Vec<f64>,
}

impl TrainHistory {
    pub fn f1_trace(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.f1).collect()
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Checkpoint with the best validation F1 (latest epoch on ties), or the
    /// initial model when no epoch ran.
    pub model: FemModel,
    /// Model after the final epoch.
    pub last: FemModel,
    pub best_epoch: Option<usize>,
    pub history: TrainHistory,
}

pub(crate) struct Encoded {
    pub segments: Vec<Vec<f64>>,
    pub label: Label,
}

pub(crate) fn encode_corpus(
    encoder: &dyn SegmentEncoder,
    corpus: &Corpus,
    policy: &TruncationPolicy,
    mask: &ElementMask,
) -> Result<Vec<Encoded>, FemError> {
    corpus
        .samples
        .par_iter()
        .map(|s| {
            let enc = encode_sample(encoder, s, policy, mask)?;
            Ok(Encoded {
                segments: enc.segments.into_iter().map(|seg| seg.vector).collect(),
                label: s.label,
            })
        })
        .collect()
}

fn views(e: &Encoded) -> Vec<&[f64]> {
    e.segments.iter().map(Vec::as_slice).collect()
}

fn validate(model: &FemModel, data: &[Encoded], lambda: f64) -> Result<(f64, ConfusionCounts), FemError> {
    let mut probs = Vec::with_capacity(data.len());
    let mut counts = ConfusionCounts::default();
    for e in data {
        let p = model.network.probabilities(&views(e))?;
        counts.record(decide(p).label_hat, e.label);
        probs.push(p);
    }
    let labels: Vec<Label> = data.iter().map(|e| e.label).collect();
    let l = loss(&probs, &labels, &model.network.params.classifier_w, lambda);
    Ok((l, counts))
}

/// Trains a model on `train`, tracking validation metrics every epoch.
///
/// Segments outside `config.element_mask` are replaced by the empty-segment
/// embedding. Mini-batches are reshuffled each epoch; updates use the
/// configured adaptive-moment optimizer under the warm-up/cosine schedule.
/// Identical inputs and seed give identical histories.
pub fn train(
    encoder: Arc<dyn SegmentEncoder>,
    train: &Corpus,
    val: &Corpus,
    config: &FemConfig,
) -> Result<TrainOutcome, FemError> {
    config.validate()?;
    if train.is_empty() {
        return Err(FemError::EmptyTrainSplit);
    }
    if val.is_empty() {
        return Err(FemError::EmptyValidationSplit);
    }
    let schedule = config.schedule(train.len())?;
    let mask = config.element_mask;
    let train_data = encode_corpus(encoder.as_ref(), train, &config.truncation, &mask)?;
    let val_data = encode_corpus(encoder.as_ref(), val, &config.truncation, &mask)?;

    let mut model = FemModel::init(encoder, config);
    let mut best = (model.clone(), None::<usize>, f64::NEG_INFINITY);
    let mut history = TrainHistory::default();
    let mut adam = Adam::new(config.optimizer, &model.network.params);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);

    let mut order: Vec<usize> = (0..train_data.len()).collect();
    let mut step = 0usize;
    for epoch in 1..=config.epochs {
        let last_good = model.clone();
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        let mut lr = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<(Vec<&[f64]>, Label)> = chunk
                .iter()
                .map(|&i| (views(&train_data[i]), train_data[i].label))
                .collect();
            let (l, grads) = model
                .network
                .loss_and_gradients(&batch, config.l2_lambda, Some(&mut rng))?;
            step += 1;
            lr = schedule.lr_at(step.min(schedule.total_steps))?;
            history.lr_trace.push(lr);
            adam.step(&mut model.network.params, &grads, lr);
            epoch_loss += l;
            batches += 1;
        }
        let train_loss = epoch_loss / batches as f64;
        if !train_loss.is_finite() || !model.network.params.is_finite() {
            return Err(FemError::Diverged {
                epoch,
                checkpoint: Box::new(last_good),
                history,
            });
        }

        let (val_loss, counts) = validate(&model, &val_data, config.l2_lambda)?;
        let m = metrics(&counts).expect("validation split is non-empty");
        debug!(
            "epoch {epoch}: train loss {train_loss:.5} val loss {val_loss:.5} f1 {:.4}",
            m.f1
        );
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            loss: val_loss,
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            lr,
        });
        if m.f1 >= best.2 {
            best = (model.clone(), Some(epoch), m.f1);
        }
    }
    if let Some(epoch) = best.1 {
        info!("best validation F1 {:.4} at epoch {epoch}", best.2);
    }
    Ok(TrainOutcome {
        model: best.0,
        last: model,
        best_epoch: best.1,
        history,
    })
}
