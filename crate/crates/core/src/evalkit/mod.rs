//! Metrics, ablation runs, similarity analysis, case comparisons, plots and
//! report assembly.

mod ablation;
mod case;
pub mod fixtures;
mod metrics;
pub mod plots;
pub mod report;
mod similarity;

pub use ablation::{run_ablation, AblationConfig, AblationOutcome, AblationPlan, AblationResults, AblationRow};
pub use case::{case_compare, compare_samples, CaseReport, CaseSide};
pub use metrics::{confusion, evaluate, f1_score, metrics, Classifier, ConfusionCounts, Degenerate, MetricSet};
pub use similarity::{
    cosine_similarity, mean_pair_similarity, similarity_report, spearman, Representation, SimilarityCondition,
    SimilarityOptions, SimilarityReport, SimilarityRow,
};

use thiserror::Error;

use crate::augmentation::AugmentError;
use crate::encoder::EncoderError;
use crate::fem::FemError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{predictions} predictions for {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("nothing to evaluate")]
    EmptyEvaluation,
    #[error("cosine similarity of a zero vector")]
    ZeroVector,
    #[error("vectors of length {0} and {1}")]
    DimensionMismatch(usize, usize),
    #[error("corpus contains no original/altered pairs")]
    NoPairs,
    #[error("ablation plan is empty")]
    EmptyPlan,
    #[error("missing artifacts: {}", .0.join(", "))]
    MissingArtifacts(Vec<String>),
    #[error("plot: {0}")]
    Plot(String),
    #[error(transparent)]
    Model(#[from] FemError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
