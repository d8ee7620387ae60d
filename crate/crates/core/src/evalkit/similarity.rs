use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fixtures::SimilarityFixtureRow;
use super::{evaluate, EvalError};
use crate::corpus::{Corpus, FrameElement, LabeledSample};
use crate::encoder::{encode_segment, ElementMask};
use crate::fem::FemModel;

/// `u·v / (‖u‖‖v‖)`, clamped to [-1, 1].
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64, EvalError> {
    if u.len() != v.len() {
        return Err(EvalError::DimensionMismatch(u.len(), v.len()));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|b| b * b).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(EvalError::ZeroVector);
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // Ties share the mean of their 1-based positions.
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties. `None` for
/// mismatched or too-short inputs, or when either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Mean cosine similarity over vector pairs. Pairs with a zero vector are
/// skipped; the count of skipped pairs is returned alongside.
pub fn mean_pair_similarity(pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<(Option<f64>, usize), EvalError> {
    let mut sum = 0.0;
    let mut used = 0usize;
    for (a, b) in pairs {
        match cosine_similarity(a, b) {
            Ok(s) => {
                sum += s;
                used += 1;
            }
            Err(EvalError::ZeroVector) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(((used > 0).then(|| sum / used as f64), pairs.len() - used))
}

/// Which vector stands for a sample when comparing a pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// The model's post-ReLU BiLSTM state.
    #[default]
    HiddenState,
    /// Concatenated encoder embeddings of the unmasked segments.
    SegmentEmbeddings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityCondition {
    pub name: String,
    pub mask: ElementMask,
}

impl SimilarityCondition {
    pub fn new(name: impl Into<String>, mask: ElementMask) -> Self {
        SimilarityCondition {
            name: name.into(),
            mask,
        }
    }

    /// Article text alone, all four elements, then all four minus each one.
    pub fn defaults() -> Vec<SimilarityCondition> {
        let mut out = vec![
            Self::new("article", ElementMask::text_only()),
            Self::new("all-4-elements", ElementMask::frames_only()),
        ];
        for e in FrameElement::ALL {
            out.push(Self::new(
                format!("without-{}", e.short_name()),
                ElementMask::frames_only().without(e),
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityRow {
    pub condition: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<ElementMask>,
    /// Mean pair similarity; `None` when every pair had a zero vector.
    pub similarity: Option<f64>,
    /// Mean similarity of the encoder's article embeddings, for conditions
    /// that include the article.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoder_similarity: Option<f64>,
    pub f1: Option<f64>,
    #[serde(default)]
    pub skipped_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub source: String,
    pub pairs: usize,
    pub representation: Representation,
    pub rows: Vec<SimilarityRow>,
    /// Rank correlation between similarity and F1 over rows that have both.
    pub spearman: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct SimilarityOptions {
    pub representation: Representation,
    /// F1 per condition name, used instead of evaluating the model under
    /// the condition's mask (e.g. scores from per-configuration training).
    pub f1_override: BTreeMap<String, f64>,
}

impl SimilarityReport {
    fn with_rows(source: String, pairs: usize, representation: Representation, rows: Vec<SimilarityRow>) -> Self {
        let (s, f): (Vec<f64>, Vec<f64>) = rows.iter().filter_map(|r| Some((r.similarity?, r.f1?))).unzip();
        SimilarityReport {
            source,
            pairs,
            representation,
            spearman: spearman(&s, &f),
            rows,
        }
    }

    /// Replays reference (similarity, F1) rows verbatim.
    pub fn from_fixture(source: &str, rows: &[SimilarityFixtureRow]) -> Self {
        let rows = rows
            .iter()
            .map(|r| SimilarityRow {
                condition: r.condition.to_string(),
                mask: None,
                similarity: Some(r.similarity),
                encoder_similarity: None,
                f1: Some(r.f1),
                skipped_pairs: 0,
            })
            .collect();
        Self::with_rows(source.to_string(), 1, Representation::HiddenState, rows)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), EvalError> {
        let mut w = csv::Writer::from_writer(writer);
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let io = |e: csv::Error| EvalError::Io(e.into());
        w.write_record(["condition", "mask", "similarity", "encoder_similarity", "f1"])
            .map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.condition.clone(),
                r.mask.map(|m| m.to_string()).unwrap_or_default(),
                opt(r.similarity),
                opt(r.encoder_similarity),
                opt(r.f1),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn represent(
    model: &FemModel,
    sample: &LabeledSample,
    mask: &ElementMask,
    representation: Representation,
) -> Result<Vec<f64>, EvalError> {
    match representation {
        Representation::HiddenState => Ok(model.hidden_state(sample, mask)?),
        Representation::SegmentEmbeddings => {
            let encoded = model.encode(sample, mask)?;
            Ok(encoded
                .segments
                .iter()
                .enumerate()
                .filter(|(i, _)| mask.includes(*i))
                .flat_map(|(_, s)| s.vector.iter().copied())
                .collect())
        }
    }
}

/// Per condition, the mean cosine similarity between each original sample
/// and its altered counterpart, joined with the condition's F1 on `corpus`.
pub fn similarity_report(
    model: &FemModel,
    corpus: &Corpus,
    conditions: &[SimilarityCondition],
    options: &SimilarityOptions,
) -> Result<SimilarityReport, EvalError> {
    let pairs = corpus.pairs();
    if pairs.is_empty() {
        return Err(EvalError::NoPairs);
    }
    let mut rows = Vec::with_capacity(conditions.len());
    for cond in conditions {
        let vectors: Vec<(Vec<f64>, Vec<f64>)> = pairs
            .par_iter()
            .map(|(a, b)| {
                Ok((
                    represent(model, a, &cond.mask, options.representation)?,
                    represent(model, b, &cond.mask, options.representation)?,
                ))
            })
            .collect::<Result<_, EvalError>>()?;
        let (similarity, skipped_pairs) = mean_pair_similarity(&vectors)?;

        let encoder_similarity = if cond.mask.includes_article() {
            let bodies: Vec<(Vec<f64>, Vec<f64>)> = pairs
                .par_iter()
                .map(|(a, b)| {
                    let enc = |s: &LabeledSample| {
                        encode_segment(model.encoder.as_ref(), Some(&s.article.body), &model.truncation)
                            .map(|e| e.vector)
                    };
                    Ok((enc(a)?, enc(b)?))
                })
                .collect::<Result<_, EvalError>>()?;
            mean_pair_similarity(&bodies)?.0
        } else {
            None
        };

        let f1 = match options.f1_override.get(&cond.name) {
            Some(&f1) => Some(f1),
            None => Some(evaluate(model, corpus, &cond.mask)?.1.f1),
        };
        rows.push(SimilarityRow {
            condition: cond.name.clone(),
            mask: Some(cond.mask),
            similarity,
            encoder_similarity,
            f1,
            skipped_pairs,
        });
    }
    Ok(SimilarityReport::with_rows(
        corpus.name.clone(),
        pairs.len(),
        options.representation,
        rows,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalkit::fixtures::SINGLE_ARTICLE_SIMILARITY;

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let s = cosine_similarity(&[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((s - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((cosine_similarity(&[3.0, -2.0], &[3.0, -2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]),
            Err(EvalError::ZeroVector)
        ));
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 0.0]),
            Err(EvalError::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn spearman_ties_and_degenerate_inputs() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 1.0], &[1.0, 2.0]), None);
        assert_eq!(ranks(&[5.0, 1.0, 5.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn single_article_fixture_correlation() {
        let r = SimilarityReport::from_fixture("table6", &SINGLE_ARTICLE_SIMILARITY);
        assert_eq!(r.rows.len(), 6);
        assert_eq!(r.rows[0].similarity, Some(0.86));
        assert_eq!(r.rows[1].f1, Some(0.9478));
        // Rank differences squared sum to 68: 1 - 6*68/(6*35).
        assert!((r.spearman.unwrap() - (1.0 - 408.0 / 210.0)).abs() < 1e-12);
    }

    #[test]
    fn default_conditions() {
        let c = SimilarityCondition::defaults();
        assert_eq!(c.len(), 6);
        assert_eq!(c[2].name, "without-problem");
        assert_eq!(c[2].mask.to_string(), "00111");
    }
}
