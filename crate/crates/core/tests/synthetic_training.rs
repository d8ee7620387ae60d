use std::sync::Arc;
use std::time::Instant;

use femkit::encoder::{ElementMask, SegmentEncoder};
use femkit::evalkit::evaluate;
use femkit::fem::train;
use femkit::synthetic::{synthetic_config, synthetic_corpus};

#[test]
fn overfits_and_is_repeatable() {
    let s = synthetic_corpus(3);
    let enc: Arc<dyn SegmentEncoder> = Arc::new(s.encoder.clone());
    let cfg = synthetic_config(11);
    let t = Instant::now();
    let a = train(enc.clone(), &s.corpus, &s.corpus, &cfg).unwrap();
    eprintln!("trained in {:?}; best epoch {:?}", t.elapsed(), a.best_epoch);
    let trace = a.history.f1_trace();
    eprintln!("f1 every 20: {:?}", trace.iter().step_by(20).collect::<Vec<_>>());
    let (_, m) = evaluate(&a.model, &s.corpus, &ElementMask::all()).unwrap();
    assert!(m.f1 >= 0.95, "{m:?}");
    let b = train(enc, &s.corpus, &s.corpus, &cfg).unwrap();
    assert_eq!(a.history, b.history);
}
