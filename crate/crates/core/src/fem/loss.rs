//! Cross-entropy objective with an L2 penalty on the classifier weights.

use ndarray::Array2;

use super::network::PROB_EPSILON;
use crate::corpus::Label;

/// Scalar binary cross-entropy for one sample, where `p` is the predicted
/// probability of label 1 (information): `-(y ln p + (1-y) ln(1-p))`.
/// Both probabilities are clamped at `PROB_EPSILON`.
pub fn binary_cross_entropy(p: f64, label: Label) -> f64 {
    match label {
        Label::Information => -p.max(PROB_EPSILON).ln(),
        Label::Misinformation => -(1.0 - p).max(PROB_EPSILON).ln(),
    }
}

/// Mean cross-entropy over a batch of two-class probability vectors
/// (index 0 = misinformation) plus `lambda · ‖W‖²`.
pub fn loss(probabilities: &[[f64; 2]], labels: &[Label], classifier_w: &Array2<f64>, lambda: f64) -> f64 {
    assert_eq!(probabilities.len(), labels.len(), "one label per probability vector");
    let n = probabilities.len();
    let data = if n == 0 {
        0.0
    } else {
        probabilities
            .iter()
            .zip(labels)
            .map(|(p, &y)| binary_cross_entropy(p[Label::Information.as_index()], y))
            .sum::<f64>()
            / n as f64
    };
    data + lambda * classifier_w.iter().map(|w| w * w).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn info(p: f64) -> [f64; 2] {
        [1.0 - p, p]
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn half_probability_costs_ln_two() {
        let w = Array2::zeros((2, 4));
        let l = loss(&[info(0.5)], &[Label::Information], &w, 0.0);
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((l - 0.693147).abs() < 1e-6);
    }

    #[test]
    fn near_certain_correct_prediction_costs_nothing() {
        let w = Array2::zeros((2, 4));
        let p = 1.0 - PROB_EPSILON;
        let l = loss(&[info(p), info(p)], &[Label::Information; 2], &w, 0.0);
        assert!(l < 1e-11);
    }

    #[test]
    fn two_sample_batch() {
        // Independent scalar evaluation: -(ln 0.9 + ln 0.8) / 2.
        let expected = -(0.9f64.ln() + 0.8f64.ln()) / 2.0;
        assert!((expected - 0.164252).abs() < 1e-6);
        let w = Array2::zeros((2, 4));
        let l = loss(
            &[info(0.9), info(0.2)],
            &[Label::Information, Label::Misinformation],
            &w,
            0.0,
        );
        assert!((l - expected).abs() < 1e-12);
    }

    #[test]
    fn l2_term_uses_classifier_weights() {
        let w = array![[1.0, 2.0], [0.0, -1.0]];
        let l = loss(&[info(0.5)], &[Label::Information], &w, 0.1);
        assert!((l - (std::f64::consts::LN_2 + 0.6)).abs() < 1e-12);
    }

    #[test]
    fn certain_wrong_prediction_is_clamped() {
        assert!((binary_cross_entropy(0.0, Label::Information) + PROB_EPSILON.ln()).abs() < 1e-9);
        assert!(binary_cross_entropy(1.0, Label::Misinformation).is_finite());
    }
}
