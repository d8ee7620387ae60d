use std::collections::HashSet;

use femkit::corpus::{split_corpus, Article, Corpus, FrameElementSet, Label, LabeledSample, Provenance, SplitSpec};
use femkit::encoder::{encode_segment, HashingEncoder, SegmentEncoder, Tokenizer, TruncationPolicy};
use femkit::evalkit::{confusion, cosine_similarity, metrics};
use femkit::fem::{decide, softmax2};
use proptest::prelude::*;

fn corpus(labels: &[bool]) -> Corpus {
    let samples = labels
        .iter()
        .enumerate()
        .map(|(i, &mis)| {
            let label = if mis { Label::Misinformation } else { Label::Information };
            LabeledSample::new(
                Article::new(format!("s{i}"), format!("body {i}")),
                FrameElementSet::empty(),
                label,
                Provenance::External,
            )
        })
        .collect();
    Corpus::new("p", samples)
}

fn label(b: bool) -> Label {
    if b {
        Label::Misinformation
    } else {
        Label::Information
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn splits_partition_the_corpus(labels in prop::collection::vec(any::<bool>(), 10..120), seed in any::<u64>()) {
        let c = corpus(&labels);
        let spec = SplitSpec::new(seed);
        let s = split_corpus(&c, &spec).unwrap();
        let parts = [&s.train, &s.val, &s.test];
        let total: usize = parts.iter().map(|p| p.len()).sum();
        prop_assert_eq!(total, c.len());
        let ids: HashSet<&str> = parts.iter().flat_map(|p| p.samples.iter().map(|x| x.id())).collect();
        prop_assert_eq!(ids.len(), c.len());

        let n = c.len() as f64;
        let mis = labels.iter().filter(|&&b| b).count() as f64;
        for (p, f) in parts.iter().zip(spec.fractions()) {
            prop_assert!((p.len() as f64 - f * n).abs() < 1.0 + 1e-9);
            let share = p.len() as f64 / n * mis;
            prop_assert!((p.label_counts().0 as f64 - share).abs() <= 1.0 + 1e-9);
        }
        prop_assert_eq!(split_corpus(&c, &spec).unwrap(), s);
    }

    #[test]
    fn encoding_is_stable_and_sized(text in "[a-zA-Z ,.!?]{0,200}", dim in 1usize..64) {
        let enc = HashingEncoder::new(dim);
        let policy = TruncationPolicy::default();
        let a = encode_segment(&enc, Some(&text), &policy).unwrap();
        let b = encode_segment(&HashingEncoder::new(dim), Some(&text), &policy).unwrap();
        prop_assert_eq!(a.vector.len(), dim);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.empty, enc.tokenize(&text).unwrap().is_empty());
        if a.empty {
            prop_assert_eq!(a.vector, enc.empty_embedding().unwrap());
        }
    }

    #[test]
    fn argmax_ignores_a_common_logit_shift(z0 in -30.0f64..30.0, z1 in -30.0f64..30.0, shift in -30.0f64..30.0) {
        let p = softmax2([z0, z1]);
        let q = softmax2([z0 + shift, z1 + shift]);
        prop_assert_eq!(decide(p).label_hat, decide(q).label_hat);
        let expected = if z0 >= z1 { Label::Misinformation } else { Label::Information };
        if (z0 - z1).abs() > 1e-9 {
            prop_assert_eq!(decide(p).label_hat, expected);
        }
    }

    #[test]
    fn metric_identities(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..200)) {
        let pred: Vec<Label> = pairs.iter().map(|p| label(p.0)).collect();
        let actual: Vec<Label> = pairs.iter().map(|p| label(p.1)).collect();
        let c = confusion(&pred, &actual).unwrap();
        prop_assert_eq!(c.total() as usize, pairs.len());
        let m = metrics(&c).unwrap();
        for v in [m.accuracy, m.precision, m.recall, m.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-12);
        prop_assert!(m.f1 >= m.precision.min(m.recall) - 1e-12 || m.f1 == 0.0);
        let correct = pred.iter().zip(&actual).filter(|(p, a)| p == a).count();
        prop_assert_eq!(m.accuracy, correct as f64 / pairs.len() as f64);
        // Flipping every prediction swaps hits for misses.
        let flipped: Vec<Label> = pred.iter().map(|&p| label(p == Label::Information)).collect();
        let f = confusion(&flipped, &actual).unwrap();
        prop_assert_eq!((f.tp, f.tn, f.fp, f.fn_), (c.fn_, c.fp, c.tn, c.tp));
    }

    #[test]
    fn cosine_properties(
        u in prop::collection::vec(-100.0f64..100.0, 1..24),
        scale in 0.001f64..1000.0,
        seed in any::<u64>(),
    ) {
        prop_assume!(u.iter().any(|x| x.abs() > 1e-6));
        let v: Vec<f64> = u.iter().enumerate().map(|(i, x)| (x * 0.37 + (seed.wrapping_add(i as u64) % 17) as f64) - 8.0).collect();
        prop_assume!(v.iter().any(|x| x.abs() > 1e-6));
        let uv = cosine_similarity(&u, &v).unwrap();
        prop_assert!((uv - cosine_similarity(&v, &u).unwrap()).abs() <= 1e-6);
        let su: Vec<f64> = u.iter().map(|x| x * scale).collect();
        prop_assert!((uv - cosine_similarity(&su, &v).unwrap()).abs() <= 1e-6);
        prop_assert!(uv.abs() <= 1.0);
        prop_assert!((cosine_similarity(&u, &u).unwrap() - 1.0).abs() <= 1e-6);
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        prop_assert!((cosine_similarity(&neg, &u).unwrap() + 1.0).abs() <= 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn softmax_is_a_distribution(z0 in -1e3f64..1e3, z1 in -1e3f64..1e3) {
        let p = softmax2([z0, z1]);
        prop_assert!((p[0] + p[1] - 1.0).abs() <= 1e-6);
        prop_assert!(p.iter().all(|x| x.is_finite() && (0.0..=1.0).contains(x)));
    }
}

#[test]
fn mismatched_lengths_and_zero_vectors_are_errors() {
    assert!(cosine_similarity(&[1.0, 0.0], &[1.0]).is_err());
    assert!(cosine_similarity(&[0.0, 0.0], &[1.0, 1.0]).is_err());
    assert!(confusion(&[Label::Information], &[]).is_err());
}
