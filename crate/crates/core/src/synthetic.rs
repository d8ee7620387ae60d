//! A small constructed corpus whose label depends only on the problem
//! definition, for overfitting checks and ablation sanity runs.
//!
//! Ten story contexts each appear twice: once as an original (label 1) and
//! once as an altered variant (label 0). The two share article body and the
//! causal, moral and treatment elements; only the problem definition
//! differs. Problem texts are picked from a fixed candidate pool by their
//! projection onto a seeded direction in hashing-encoder space: the ten
//! highest scores go to originals, the ten lowest to altered variants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Article, Corpus, FrameElementSet, Label, LabeledSample, Provenance};
use crate::encoder::{encode_segment, HashingEncoder, TruncationPolicy};
use crate::fem::FemConfig;

pub const PAIRS: usize = 10;
pub const DIM: usize = 16;

const QUALIFIERS: [&str; 8] = [
    "rising", "hidden", "urgent", "chronic", "sudden", "costly", "local", "national",
];
const SUBJECTS: [&str; 8] = [
    "water",
    "housing",
    "energy",
    "transport",
    "health",
    "school",
    "budget",
    "harbour",
];
const ISSUES: [&str; 5] = ["shortage", "failure", "debt", "backlog", "scandal"];
const PLACES: [&str; 10] = [
    "Ashford", "Bramley", "Carlow", "Dunmore", "Elmstead", "Fairlie", "Glenroy", "Hawick", "Inverell", "Jedburgh",
];

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub corpus: Corpus,
    pub encoder: HashingEncoder,
    /// Direction whose sign (relative to `threshold`) defines the label.
    pub direction: Vec<f64>,
    pub threshold: f64,
}

/// Problem-definition embedding used for labelling.
pub fn problem_embedding(encoder: &HashingEncoder, text: &str) -> Vec<f64> {
    encode_segment(encoder, Some(text), &TruncationPolicy::default())
        .expect("hashing encoder is infallible")
        .vector
}

fn candidates() -> Vec<String> {
    let mut out = Vec::new();
    for q in QUALIFIERS {
        for s in SUBJECTS {
            for i in ISSUES {
                out.push(format!("The {q} {s} {i}"));
            }
        }
    }
    out
}

pub fn synthetic_corpus(seed: u64) -> Synthetic {
    let encoder = HashingEncoder::new(DIM);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let direction: Vec<f64> = (0..DIM).map(|_| rng.random_range(-1.0..1.0)).collect();
    let score = |t: &str| -> f64 {
        problem_embedding(&encoder, t)
            .iter()
            .zip(&direction)
            .map(|(a, b)| a * b)
            .sum()
    };
    let mut scored: Vec<(f64, String)> = candidates().into_iter().map(|t| (score(&t), t)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    let high = &scored[..PAIRS];
    let low = &scored[scored.len() - PAIRS..];
    let threshold = (high[PAIRS - 1].0 + low[0].0) / 2.0;

    let mut samples = Vec::with_capacity(2 * PAIRS);
    for (i, place) in PLACES.iter().enumerate() {
        let body = format!(
            "Officials in {place} released the annual review of public services. \
             The report covers spending, staffing and planned works for the coming year."
        );
        let rest = [
            format!("Decisions taken by the {place} council over the last decade"),
            format!("Residents of {place} deserve a clear account"),
            format!("Publish a full plan for {place} before the next election"),
        ];
        let elements = |problem: &str| {
            FrameElementSet::from_texts([
                Some(problem.to_string()),
                Some(rest[0].clone()),
                Some(rest[1].clone()),
                Some(rest[2].clone()),
            ])
        };
        let id = format!("syn-{i:02}");
        samples.push(LabeledSample::new(
            Article::new(&id, &body).with_topic("synthetic"),
            elements(&high[i].1),
            Label::Information,
            Provenance::Original,
        ));
        let mut altered = LabeledSample::new(
            Article::new(format!("{id}-alt"), &body).with_topic("synthetic"),
            elements(&low[i].1),
            Label::Misinformation,
            Provenance::Altered,
        );
        altered.derived_from = Some(id);
        samples.push(altered);
    }
    let mut corpus = Corpus::new("synthetic", samples);
    corpus.metadata.insert("seed".into(), serde_json::Value::from(seed));
    Synthetic {
        corpus,
        encoder,
        direction,
        threshold,
    }
}

/// Hyperparameters that fit the synthetic corpus quickly on a CPU. The
/// learning rate is far above the production default because the corpus is
/// tiny and the run is short.
pub fn synthetic_config(seed: u64) -> FemConfig {
    FemConfig {
        hidden_size: 8,
        dropout_rate: 0.1,
        peak_lr: 1e-2,
        epochs: 200,
        batch_size: 4,
        ..FemConfig::new(seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::FrameElement;

    #[test]
    fn labels_follow_the_direction() {
        let s = synthetic_corpus(7);
        assert_eq!(s.corpus.len(), 20);
        assert_eq!(s.corpus.label_counts(), (10, 10));
        s.corpus.validate().unwrap();
        for sample in &s.corpus.samples {
            let p = sample.elements.get(FrameElement::ProblemDefinition).unwrap();
            let score: f64 = problem_embedding(&s.encoder, p)
                .iter()
                .zip(&s.direction)
                .map(|(a, b)| a * b)
                .sum();
            assert_eq!(score > s.threshold, sample.label == Label::Information);
        }
        assert_eq!(s.corpus.pairs().len(), 10);
    }

    #[test]
    fn pairs_differ_only_in_problem() {
        let s = synthetic_corpus(1);
        for (a, b) in s.corpus.pairs() {
            assert_eq!(a.article.body, b.article.body);
            for e in &FrameElement::ALL[1..] {
                assert_eq!(a.elements.get(*e), b.elements.get(*e));
            }
            assert_ne!(
                a.elements.get(FrameElement::ProblemDefinition),
                b.elements.get(FrameElement::ProblemDefinition)
            );
        }
    }
}
