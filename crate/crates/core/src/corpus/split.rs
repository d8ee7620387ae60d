use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusError, Label};

const FRACTION_TOLERANCE: f64 = 1e-9;

/// Train/validation/test proportions. The seed has no default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
    pub stratify_by_label: bool,
}

impl SplitSpec {
    /// 80/10/10, stratified.
    pub fn new(seed: u64) -> Self {
        SplitSpec {
            train_fraction: 0.8,
            val_fraction: 0.1,
            test_fraction: 0.1,
            seed,
            stratify_by_label: true,
        }
    }

    pub fn fractions(&self) -> [f64; 3] {
        [self.train_fraction, self.val_fraction, self.test_fraction]
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        for f in self.fractions() {
            if !(f > 0.0 && f < 1.0) {
                return Err(CorpusError::InvalidSplit(format!("fraction {f} is outside (0, 1)")));
            }
        }
        let sum: f64 = self.fractions().iter().sum();
        if (sum - 1.0).abs() > FRACTION_TOLERANCE {
            return Err(CorpusError::InvalidSplit(format!("fractions sum to {sum}, not 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: Corpus,
    pub val: Corpus,
    pub test: Corpus,
}

/// Largest-remainder apportionment of `total` items by `weights` (which sum
/// to 1). Ties go to the earlier slot.
pub(crate) fn apportion_by(total: usize, weights: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &slot in order.iter().cycle().take(total.saturating_sub(assigned)) {
        counts[slot] += 1;
    }
    counts
}

fn apportion(total: usize, weights: [f64; 3]) -> [usize; 3] {
    apportion_by(total, &weights).try_into().unwrap()
}

/// Partitions a corpus into train/val/test. Deterministic in (corpus, spec).
///
/// Split sizes are apportioned from the global fractions. With stratification
/// the misinformation class is apportioned across splits proportionally to the
/// split sizes and the information class takes the remainder, so every
/// per-split class count is within one sample of its proportional share.
pub fn split_corpus(corpus: &Corpus, spec: &SplitSpec) -> Result<Splits, CorpusError> {
    spec.validate()?;
    let n = corpus.len();
    let sizes = apportion(n, spec.fractions());
    if sizes.contains(&0) {
        return Err(CorpusError::TooFewSamples { available: n, sizes });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut assignment = vec![0usize; n];

    if spec.stratify_by_label {
        let mut groups: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for (i, s) in corpus.samples.iter().enumerate() {
            groups[s.label.as_index()].push(i);
        }
        let misinfo = groups[Label::Misinformation.as_index()].len();
        let size_weights = sizes.map(|s| s as f64 / n as f64);
        let misinfo_counts = apportion(misinfo, size_weights);
        let info_counts = [0, 1, 2].map(|k| sizes[k] - misinfo_counts[k]);
        for (group, counts) in groups.iter_mut().zip([misinfo_counts, info_counts]) {
            group.shuffle(&mut rng);
            let mut it = group.iter();
            for (split, &count) in counts.iter().enumerate() {
                for &idx in it.by_ref().take(count) {
                    assignment[idx] = split;
                }
            }
        }
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut it = order.into_iter();
        for (split, &count) in sizes.iter().enumerate() {
            for idx in it.by_ref().take(count) {
                assignment[idx] = split;
            }
        }
    }

    let part = |k: usize, suffix: &str| {
        let mut c = Corpus::new(
            format!("{}-{suffix}", corpus.name),
            corpus
                .samples
                .iter()
                .zip(&assignment)
                .filter(|(_, &a)| a == k)
                .map(|(s, _)| s.clone())
                .collect(),
        );
        c.schema_version = corpus.schema_version;
        c.metadata = corpus.metadata.clone();
        c
    };
    Ok(Splits {
        train: part(0, "train"),
        val: part(1, "val"),
        test: part(2, "test"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Article, FrameElementSet, LabeledSample, Provenance};

    fn corpus(n: usize, misinfo: usize) -> Corpus {
        let samples = (0..n)
            .map(|i| {
                let label = if i < misinfo {
                    Label::Misinformation
                } else {
                    Label::Information
                };
                LabeledSample::new(
                    Article::new(format!("s{i}"), format!("body {i}")),
                    FrameElementSet::empty(),
                    label,
                    Provenance::External,
                )
            })
            .collect();
        Corpus::new("t", samples)
    }

    fn ids(c: &Corpus) -> Vec<String> {
        c.samples.iter().map(|s| s.id().to_string()).collect()
    }

    #[test]
    fn ten_samples_split_eight_one_one_deterministically() {
        let c = corpus(10, 5);
        let spec = SplitSpec::new(7);
        let a = split_corpus(&c, &spec).unwrap();
        let b = split_corpus(&c, &spec).unwrap();
        assert_eq!((a.train.len(), a.val.len(), a.test.len()), (8, 1, 1));
        assert_eq!(ids(&a.train), ids(&b.train));
        assert_eq!(ids(&a.val), ids(&b.val));
        assert_eq!(ids(&a.test), ids(&b.test));
    }

    #[test]
    fn stratified_hundred_has_forty_of_each_in_train() {
        let c = corpus(100, 50);
        let s = split_corpus(&c, &SplitSpec::new(3)).unwrap();
        let (mis, info) = s.train.label_counts();
        assert!((39..=41).contains(&mis), "{mis}");
        assert!((39..=41).contains(&info), "{info}");
    }

    #[test]
    fn two_samples_are_too_few() {
        let c = corpus(2, 1);
        assert!(matches!(
            split_corpus(&c, &SplitSpec::new(1)),
            Err(CorpusError::TooFewSamples { available: 2, .. })
        ));
    }

    #[test]
    fn fractions_must_sum_to_one() {
        let mut spec = SplitSpec::new(1);
        spec.test_fraction = 0.2;
        assert!(matches!(spec.validate(), Err(CorpusError::InvalidSplit(_))));
        spec.test_fraction = 0.0;
        spec.val_fraction = 0.2;
        assert!(matches!(spec.validate(), Err(CorpusError::InvalidSplit(_))));
    }

    #[test]
    fn apportion_matches_total() {
        assert_eq!(apportion(10, [0.8, 0.1, 0.1]), [8, 1, 1]);
        assert_eq!(apportion(2, [0.8, 0.1, 0.1]), [2, 0, 0]);
        assert_eq!(apportion(7, [0.5, 0.25, 0.25]).iter().sum::<usize>(), 7);
    }
}
