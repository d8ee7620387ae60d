use std::collections::BTreeMap;
use std::io::Write;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::AugmentError;
use crate::corpus::{apportion_by, Corpus, LabeledSample, Provenance};

/// Writes a deterministic, topic-stratified sample of the altered articles
/// (with their originals when present) as Markdown for human review.
/// Returns the number of exported articles. `fraction` must be in (0, 1].
pub fn export_review_sample<W: Write>(
    corpus: &Corpus,
    fraction: f64,
    seed: u64,
    mut writer: W,
) -> Result<usize, AugmentError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(AugmentError::Precondition(format!(
            "review fraction {fraction} is outside (0, 1]"
        )));
    }
    let altered: Vec<&LabeledSample> = corpus
        .samples
        .iter()
        .filter(|s| s.provenance == Provenance::Altered)
        .collect();
    if altered.is_empty() {
        warn!("{}: no altered samples to export for review", corpus.name);
        return Ok(0);
    }
    let mut by_topic: BTreeMap<&str, Vec<&LabeledSample>> = BTreeMap::new();
    for s in &altered {
        by_topic
            .entry(s.article.topic.as_deref().unwrap_or(""))
            .or_default()
            .push(s);
    }
    let n = altered.len();
    let k = ((fraction * n as f64).round() as usize).clamp(1, n);
    let weights: Vec<f64> = by_topic.values().map(|g| g.len() as f64 / n as f64).collect();
    let quotas = apportion_by(k, &weights);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<&LabeledSample> = Vec::with_capacity(k);
    for (group, quota) in by_topic.into_values().zip(quotas) {
        let mut group = group;
        group.shuffle(&mut rng);
        chosen.extend(group.into_iter().take(quota));
    }
    let position = |s: &LabeledSample| corpus.samples.iter().position(|x| x.id() == s.id());
    chosen.sort_by_key(|s| position(s));

    writeln!(writer, "# Review sample\n")?;
    writeln!(
        writer,
        "{k} of {n} altered articles from `{}`, seed {seed}.",
        corpus.name
    )?;
    for s in chosen.iter().copied() {
        let a = &s.article;
        writeln!(writer, "\n## {}\n", a.id)?;
        writeln!(writer, "- topic: {}", a.topic.as_deref().unwrap_or("-"))?;
        writeln!(writer, "- frame: {}", a.frame_label.as_deref().unwrap_or("-"))?;
        writeln!(writer, "- derived from: {}", s.derived_from.as_deref().unwrap_or("-"))?;
        for (e, text) in s.elements.iter() {
            writeln!(writer, "- {}: {}", e.human_name(), text.unwrap_or("(absent)"))?;
        }
        writeln!(writer, "\n### Altered text\n\n{}", a.body)?;
        if let Some(original) = s.derived_from.as_deref().and_then(|id| corpus.get(id)) {
            writeln!(
                writer,
                "\n### Original text ({})\n\n{}",
                original.article.frame_label.as_deref().unwrap_or("-"),
                original.article.body
            )?;
        }
    }
    writer.flush()?;
    Ok(chosen.len())
}
