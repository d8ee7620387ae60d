use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::{Corpus, Label};
use crate::encoder::ElementMask;
use crate::fem::{decide, FemError, FemModel};

/// Binary confusion counts with misinformation (label 0) as the positive
/// class: a true positive is misinformation predicted as misinformation, a
/// false positive is information predicted as misinformation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub const POSITIVE: Label = Label::Misinformation;

    pub fn record(&mut self, predicted: Label, actual: Label) {
        let pos = Self::POSITIVE;
        match (predicted == pos, actual == pos) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

pub fn confusion(predictions: &[Label], labels: &[Label]) -> Result<ConfusionCounts, EvalError> {
    if predictions.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    let mut counts = ConfusionCounts::default();
    for (&p, &y) in predictions.iter().zip(labels) {
        counts.record(p, y);
    }
    Ok(counts)
}

/// Which ratios hit a zero denominator (and were therefore set to 0).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Degenerate {
    pub precision: bool,
    pub recall: bool,
    pub f1: bool,
}

impl Degenerate {
    pub fn any(&self) -> bool {
        self.precision || self.recall || self.f1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    #[serde(default)]
    pub degenerate: Degenerate,
}

/// Harmonic mean of precision and recall; `None` when both are zero.
pub fn f1_score(precision: f64, recall: f64) -> Option<f64> {
    let denom = precision + recall;
    (denom > 0.0).then(|| 2.0 * precision * recall / denom)
}

pub fn metrics(counts: &ConfusionCounts) -> Result<MetricSet, EvalError> {
    let total = counts.total();
    if total == 0 {
        return Err(EvalError::EmptyEvaluation);
    }
    let ratio = |num: u64, den: u64| if den == 0 { None } else { Some(num as f64 / den as f64) };
    let precision = ratio(counts.tp, counts.tp + counts.fp);
    let recall = ratio(counts.tp, counts.tp + counts.fn_);
    let (p, r) = (precision.unwrap_or(0.0), recall.unwrap_or(0.0));
    let f1 = f1_score(p, r);
    Ok(MetricSet {
        accuracy: (counts.tp + counts.tn) as f64 / total as f64,
        precision: p,
        recall: r,
        f1: f1.unwrap_or(0.0),
        degenerate: Degenerate {
            precision: precision.is_none(),
            recall: recall.is_none(),
            f1: f1.is_none(),
        },
    })
}

/// Anything that assigns a label to a sample under an element mask.
pub trait Classifier: Sync {
    fn classify(&self, sample: &crate::corpus::LabeledSample, mask: &ElementMask) -> Result<Label, FemError>;
}

impl Classifier for FemModel {
    fn classify(&self, sample: &crate::corpus::LabeledSample, mask: &ElementMask) -> Result<Label, FemError> {
        Ok(decide(self.probabilities(sample, mask)?).label_hat)
    }
}

impl<C: Classifier + Send> Classifier for Arc<C> {
    fn classify(&self, sample: &crate::corpus::LabeledSample, mask: &ElementMask) -> Result<Label, FemError> {
        self.as_ref().classify(sample, mask)
    }
}

/// Confusion counts and metrics of a classifier over a whole corpus.
pub fn evaluate(
    model: &dyn Classifier,
    corpus: &Corpus,
    mask: &ElementMask,
) -> Result<(ConfusionCounts, MetricSet), EvalError> {
    use rayon::prelude::*;
    let predictions: Vec<Label> = corpus
        .samples
        .par_iter()
        .map(|s| model.classify(s, mask))
        .collect::<Result<_, _>>()?;
    let labels: Vec<Label> = corpus.samples.iter().map(|s| s.label).collect();
    let counts = confusion(&predictions, &labels)?;
    Ok((counts, metrics(&counts)?))
}
