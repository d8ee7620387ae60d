//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits nonzero if any fails.

use std::collections::HashSet;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use femkit::augmentation::{AugmentSettings, Augmenter, FaultKind, FaultRule, MockClient, MockTask, Phase};
use femkit::corpus::{Article, Corpus, Label, Provenance, Splits};
use femkit::encoder::SegmentEncoder;
use femkit::evalkit::{
    confusion, cosine_similarity, evaluate, f1_score, metrics, run_ablation, AblationPlan, ConfusionCounts,
};
use femkit::fem::{lr_at, softmax2, train, FemNetwork, Schedule};
use femkit::synthetic::{problem_embedding, synthetic_config, synthetic_corpus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

const BIN: &str = env!("CARGO_BIN_EXE_femkit");
const ARTICLES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/articles.jsonl");

const CORPUS_SEED: u64 = 3;
const TRAIN_SEED: u64 = 11;

/// SHA-256 of `corpus.jsonl` from `femkit augment --client mock --seed 1`
/// on `tests/data/articles.jsonl`.
const AUGMENT_GOLDEN: &str = "a2759121580b0427e2bf0c49c1e1bbdf49d0cb8a447c334c53c42cabc3771e18";

fn full_splits(corpus: &Corpus) -> Splits {
    Splits {
        train: corpus.clone(),
        val: corpus.clone(),
        test: corpus.clone(),
    }
}

fn batch_of<'a>(data: &'a [Vec<Vec<f64>>], labels: &[Label]) -> Vec<(Vec<&'a [f64]>, Label)> {
    data.iter()
        .zip(labels)
        .map(|(segs, &l)| (segs.iter().map(Vec::as_slice).collect(), l))
        .collect()
}

fn random_segments(d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..5)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

fn gradient_check() {
    let (d, h) = (8, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let net = FemNetwork::new(d, h, 0.3, &mut rng);
    let data: Vec<Vec<Vec<f64>>> = (0..4).map(|_| random_segments(d, &mut rng)).collect();
    let labels = [
        Label::Misinformation,
        Label::Information,
        Label::Information,
        Label::Misinformation,
    ];
    let batch = batch_of(&data, &labels);
    let lambda = 0.05;
    let loss = |n: &FemNetwork| n.loss_and_gradients::<ChaCha8Rng>(&batch, lambda, None).unwrap().0;
    let (_, grads) = net.loss_and_gradients::<ChaCha8Rng>(&batch, lambda, None).unwrap();

    let eps = 1e-6;
    let mut probe = net.clone();
    for ((i, j), &analytic) in grads.classifier_w.indexed_iter() {
        let orig = probe.params.classifier_w[[i, j]];
        probe.params.classifier_w[[i, j]] = orig + eps;
        let up = loss(&probe);
        probe.params.classifier_w[[i, j]] = orig - eps;
        let down = loss(&probe);
        probe.params.classifier_w[[i, j]] = orig;
        let numeric = (up - down) / (2.0 * eps);
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
        assert!(
            rel < 1e-4,
            "W[{i},{j}]: analytic {analytic}, numeric {numeric}, relative error {rel}"
        );
    }
}

/// Perceptron on the problem-definition embeddings; returns true once an
/// epoch passes with no mistakes.
fn linearly_separable(points: &[(Vec<f64>, bool)]) -> bool {
    let d = points[0].0.len();
    let mut w = vec![0.0; d + 1];
    for _ in 0..100_000 {
        let mut mistakes = 0;
        for (x, positive) in points {
            let y = if *positive { 1.0 } else { -1.0 };
            let score: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + w[d];
            if y * score <= 0.0 {
                mistakes += 1;
                for (wk, xk) in w.iter_mut().zip(x) {
                    *wk += y * xk;
                }
                w[d] += y;
            }
        }
        if mistakes == 0 {
            return true;
        }
    }
    false
}

fn synthetic_overfit() {
    let started = Instant::now();
    let s = synthetic_corpus(CORPUS_SEED);
    assert_eq!(s.corpus.len(), 20);
    let points: Vec<(Vec<f64>, bool)> = s
        .corpus
        .samples
        .iter()
        .map(|x| {
            let text = x.elements.get(femkit::corpus::FrameElement::ProblemDefinition).unwrap();
            (problem_embedding(&s.encoder, text), x.label == Label::Information)
        })
        .collect();
    assert!(
        linearly_separable(&points),
        "synthetic labels are not linearly separable"
    );

    let encoder: Arc<dyn SegmentEncoder> = Arc::new(s.encoder.clone());
    let config = synthetic_config(TRAIN_SEED);
    assert!(config.epochs <= 200);
    let run = || train(encoder.clone(), &s.corpus, &s.corpus, &config).unwrap();
    let first = run();
    let (_, m) = evaluate(&first.model, &s.corpus, &config.element_mask).unwrap();
    assert!(m.f1 >= 0.95, "train F1 {}", m.f1);
    let second = run();
    assert_eq!(first.history, second.history, "training is not deterministic");
    assert_eq!(first.model.network.params, second.model.network.params);
    assert!(
        started.elapsed() < Duration::from_secs(120),
        "took {:?}",
        started.elapsed()
    );
}

fn tally(pred: &[Label], actual: &[Label]) -> (u64, u64, u64, u64) {
    let (mut tp, mut tn, mut fp, mut fn_) = (0, 0, 0, 0);
    for (p, a) in pred.iter().zip(actual) {
        match (p, a) {
            (Label::Misinformation, Label::Misinformation) => tp += 1,
            (Label::Information, Label::Information) => tn += 1,
            (Label::Misinformation, Label::Information) => fp += 1,
            (Label::Information, Label::Misinformation) => fn_ += 1,
        }
    }
    (tp, tn, fp, fn_)
}

fn metric_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let label = |r: &mut ChaCha8Rng| {
        if r.random_bool(0.5) {
            Label::Misinformation
        } else {
            Label::Information
        }
    };
    for _ in 0..1000 {
        let n = rng.random_range(1..60);
        let pred: Vec<Label> = (0..n).map(|_| label(&mut rng)).collect();
        let actual: Vec<Label> = (0..n).map(|_| label(&mut rng)).collect();
        let (tp, tn, fp, fn_) = tally(&pred, &actual);
        let c = confusion(&pred, &actual).unwrap();
        assert_eq!(c, ConfusionCounts { tp, tn, fp, fn_ });
        let m = metrics(&c).unwrap();
        let (tp, tn, fp, fn_) = (tp as f64, tn as f64, fp as f64, fn_ as f64);
        assert_eq!(m.accuracy, (tp + tn) / (tp + tn + fp + fn_));
        let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let r = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        assert_eq!((m.precision, m.recall, m.f1), (p, r, f));
    }

    // (precision, recall, F1) of the FEM rows of the four result tables.
    const FEM_ROWS: [(f64, f64, f64); 12] = [
        (0.9695, 0.9734, 0.9715),
        (0.8316, 0.8638, 0.8474),
        (0.9355, 0.9605, 0.9478),
        (0.9583, 0.9708, 0.9645),
        (0.8737, 0.8826, 0.8781),
        (0.9195, 0.9361, 0.9277),
        (0.9429, 0.9531, 0.9480),
        (0.8365, 0.8537, 0.8450),
        (0.9216, 0.9268, 0.9242),
        (0.9582, 0.9683, 0.9632),
        (0.8574, 0.8929, 0.8748),
        (0.9207, 0.9319, 0.9263),
    ];
    for (p, r, f) in FEM_ROWS {
        let got = f1_score(p, r).unwrap();
        assert!((got - f).abs() < 5e-4, "F1({p}, {r}) = {got}, reported {f}");
    }
}

fn schedule() {
    let (peak, warmup, total) = (1e-5, 100, 1000);
    let s = Schedule::new(peak, warmup, total).unwrap();
    let lr = |step| lr_at(step, &s).unwrap();
    assert!((lr(warmup) - 1e-5).abs() <= 1e-12);
    assert!(lr(total).abs() <= 1e-12);
    assert!((lr((warmup + total) / 2) - peak / 2.0).abs() <= 1e-12);
    assert_eq!(lr(0), 0.0);
    for step in 0..warmup {
        assert!(lr(step + 1) >= lr(step), "warm-up not increasing at {step}");
    }
    for step in warmup..total {
        assert!(lr(step + 1) <= lr(step), "decay not decreasing at {step}");
    }
    assert!(lr_at(total + 1, &s).is_err());
}

fn cosine_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let d = rng.random_range(1..32);
        let mut vector = || -> Vec<f64> {
            loop {
                let v: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
                if v.iter().any(|x| *x != 0.0) {
                    return v;
                }
            }
        };
        let (u, v) = (vector(), vector());
        let a = rng.random_range(0.01..100.0);
        let uv = cosine_similarity(&u, &v).unwrap();
        assert!((uv - cosine_similarity(&v, &u).unwrap()).abs() <= 1e-6);
        let scaled: Vec<f64> = u.iter().map(|x| x * a).collect();
        assert!((uv - cosine_similarity(&scaled, &v).unwrap()).abs() <= 1e-6);
        assert!(uv.abs() <= 1.0 + 1e-6);
        assert!((cosine_similarity(&u, &u).unwrap() - 1.0).abs() <= 1e-6);
    }
}

fn ablation_signal() {
    let started = Instant::now();
    let s = synthetic_corpus(CORPUS_SEED);
    let encoder: Arc<dyn SegmentEncoder> = Arc::new(s.encoder.clone());
    let plan = AblationPlan::default();
    assert_eq!(plan.configs.len(), 7);
    let results = run_ablation(encoder, &full_splits(&s.corpus), &synthetic_config(TRAIN_SEED), &plan).unwrap();
    let all = results.f1("all-4").expect("all-4 completed");
    let minus = results.f1("minus-problem").expect("minus-problem completed");
    println!("    all-4 F1 {all:.4}, minus-problem F1 {minus:.4}");
    assert!(all - minus >= 0.1, "gap {} below 0.1", all - minus);
    assert!(started.elapsed() < Duration::from_secs(900));
}

fn sha256_file(path: &Path) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

fn augment_once(out: &Path) {
    let run = Command::new(BIN)
        .args(["--seed", "1", "--client", "mock", "--output"])
        .arg(out)
        .args(["augment", "--input", ARTICLES])
        .output()
        .unwrap();
    assert!(
        run.status.success(),
        "augment: {}",
        String::from_utf8_lossy(&run.stderr)
    );
}

fn pipeline_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    augment_once(&a);
    augment_once(&b);
    for name in ["corpus.jsonl", "corpus.meta.json", "quarantine.jsonl"] {
        let (x, y) = (a.join(name), b.join(name));
        if x.exists() || y.exists() {
            assert_eq!(
                std::fs::read(&x).unwrap(),
                std::fs::read(&y).unwrap(),
                "{name} differs between runs"
            );
        }
    }
    assert_eq!(
        sha256_file(&a.join("corpus.jsonl")),
        AUGMENT_GOLDEN,
        "corpus differs from the recorded output"
    );

    // Fault injection: the second article's alteration always fails.
    let articles: Vec<Article> = std::fs::read_to_string(ARTICLES)
        .unwrap()
        .lines()
        .take(3)
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let client = MockClient::new(1).with_fault(FaultRule {
        task: MockTask::Alter,
        marker: "Rates climbed six percent".into(),
        kind: FaultKind::Transport,
        times: None,
    });
    let settings = AugmentSettings {
        seed: 1,
        backoff_ms: 0,
        ..AugmentSettings::default()
    };
    let out = Augmenter::new(&client, settings)
        .unwrap()
        .build_paired_corpus(&articles)
        .unwrap();
    assert_eq!(out.corpus.len(), 5);
    assert_eq!(out.paired, 2);
    assert_eq!(out.quarantine.len(), 1);
    assert_eq!(out.quarantine[0].article_id, "rates-2");
    assert_eq!(out.quarantine[0].phase, Phase::Alter);

    let samples = &out.corpus.samples;
    let quarantined: HashSet<&str> = out.quarantine.iter().map(|q| q.article_id.as_str()).collect();
    for (i, s) in samples.iter().enumerate() {
        match s.provenance {
            Provenance::Original => {
                assert_eq!(s.label, Label::Information);
                assert!(s.derived_from.is_none());
            }
            Provenance::Altered => {
                assert_eq!(s.label, Label::Misinformation);
                let parent = s.derived_from.as_deref().unwrap();
                assert!(
                    i > 0 && samples[i - 1].id() == parent,
                    "{} does not follow its original",
                    s.id()
                );
                assert!(!quarantined.contains(parent));
            }
            Provenance::External => panic!("unexpected provenance"),
        }
    }
    for a in &articles {
        let paired = samples.iter().any(|s| s.derived_from.as_deref() == Some(a.id.as_str()));
        assert!(
            paired != quarantined.contains(a.id.as_str()),
            "{} is both or neither paired and quarantined",
            a.id
        );
    }
}

fn fixture_replay() {
    let dir = tempfile::tempdir().unwrap();
    let output = Command::new(BIN)
        .args(["--seed", "1", "--output"])
        .arg(dir.path())
        .args(["similarity", "--fixtures", "table6"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("similarity.json")).unwrap()).unwrap();
    let expected = [
        ("Article Similarity", 0.86, 0.8474),
        ("Elements Similarity(all 4 elements)", 0.61, 0.9478),
        ("Elements Similarity(without problem)", 0.79, 0.9046),
        ("Elements Similarity(without causal)", 0.62, 0.9454),
        ("Elements Similarity(without moral)", 0.81, 0.9065),
        ("Elements Similarity(without treatment)", 0.64, 0.9354),
    ];
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for (row, (name, sim, f1)) in rows.iter().zip(expected) {
        assert_eq!(row["condition"], name);
        assert_eq!(row["similarity"].as_f64(), Some(sim));
        assert_eq!(row["f1"].as_f64(), Some(f1));
    }
    // Similarity ranks 6,1,4,2,5,3 against F1 ranks 1,6,2,5,3,4:
    // sum of squared differences 68, so rho = 1 - 6*68/210.
    let rho = report["spearman"].as_f64().unwrap();
    assert!(rho < 0.0);
    assert!((rho - (1.0 - 408.0 / 210.0)).abs() < 1e-12, "spearman {rho}");
}

fn softmax_contracts() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10_000 {
        let z = [rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)];
        let p = softmax2(z);
        assert!((p[0] + p[1] - 1.0).abs() <= 1e-6 && p.iter().all(|x| (0.0..=1.0).contains(x)));
    }
    let (d, h) = (8, 4);
    let net = FemNetwork::new(d, h, 0.3, &mut rng);
    for _ in 0..10_000 {
        let segs = random_segments(d, &mut rng);
        let views: Vec<&[f64]> = segs.iter().map(Vec::as_slice).collect();
        let p = net.probabilities(&views).unwrap();
        assert!((p[0] + p[1] - 1.0).abs() <= 1e-6);
        assert_eq!(p, net.probabilities(&views).unwrap(), "inference is not deterministic");
        assert_eq!(p, net.trace::<ChaCha8Rng>(&views, None).unwrap().probabilities);
    }
    let mut zeroed = net.clone();
    zeroed.params.classifier_w.fill(0.0);
    zeroed.params.classifier_b.fill(0.0);
    let segs = random_segments(d, &mut rng);
    let views: Vec<&[f64]> = segs.iter().map(Vec::as_slice).collect();
    assert_eq!(zeroed.probabilities(&views).unwrap(), [0.5, 0.5]);
}

fn main() {
    let criteria: [(&str, fn()); 9] = [
        ("gradient check", gradient_check),
        ("synthetic overfit", synthetic_overfit),
        ("metric oracle", metric_oracle),
        ("schedule", schedule),
        ("cosine properties", cosine_properties),
        ("ablation signal recovery", ablation_signal),
        ("pipeline determinism", pipeline_determinism),
        ("fixture replay", fixture_replay),
        ("softmax and forward contracts", softmax_contracts),
    ];
    panic::set_hook(Box::new(|info| eprintln!("    {info}")));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let ok = panic::catch_unwind(AssertUnwindSafe(check)).is_ok();
        failed += usize::from(!ok);
        println!(
            "criterion {} ({name}): {} [{:.2}s]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
