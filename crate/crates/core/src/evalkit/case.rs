use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{cosine_similarity, EvalError};
use crate::augmentation::{extract_elements, LlmClient};
use crate::corpus::{Article, FrameElement, FrameElementSet, Label, LabeledSample, Provenance};
use crate::encoder::{encode_segment, ElementMask};
use crate::fem::FemModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSide {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<String>,
    pub elements: FrameElementSet,
    pub label_text_only: Label,
    pub p_misinfo_text_only: f64,
    pub label_with_elements: Label,
    pub p_misinfo_with_elements: f64,
}

/// Two articles side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub a: CaseSide,
    pub b: CaseSide,
    /// Cosine of the encoder's body embeddings.
    pub encoder_body_similarity: Option<f64>,
    /// Cosine of the model hidden states with the body alone.
    pub body_similarity: Option<f64>,
    /// Cosine of the model hidden states with body and elements.
    pub element_similarity: Option<f64>,
}

fn zero_is_none(r: Result<f64, EvalError>) -> Result<Option<f64>, EvalError> {
    match r {
        Ok(s) => Ok(Some(s)),
        Err(EvalError::ZeroVector) => Ok(None),
        Err(e) => Err(e),
    }
}

fn side(model: &FemModel, s: &LabeledSample) -> Result<CaseSide, EvalError> {
    let text = model.predict(s, &ElementMask::text_only())?;
    let full = model.predict(s, &ElementMask::all())?;
    Ok(CaseSide {
        id: s.article.id.clone(),
        frame: s.article.frame_label.clone(),
        elements: s.elements.clone(),
        label_text_only: text.label_hat,
        p_misinfo_text_only: text.p_misinfo,
        label_with_elements: full.label_hat,
        p_misinfo_with_elements: full.p_misinfo,
    })
}

/// Compares two samples whose elements are already known.
pub fn compare_samples(a: &LabeledSample, b: &LabeledSample, model: &FemModel) -> Result<CaseReport, EvalError> {
    let body = |s: &LabeledSample| encode_segment(model.encoder.as_ref(), Some(&s.article.body), &model.truncation);
    let hidden = |s: &LabeledSample, m: ElementMask| model.hidden_state(s, &m);
    let text = ElementMask::text_only();
    let all = ElementMask::all();
    Ok(CaseReport {
        encoder_body_similarity: zero_is_none(cosine_similarity(&body(a)?.vector, &body(b)?.vector))?,
        body_similarity: zero_is_none(cosine_similarity(&hidden(a, text)?, &hidden(b, text)?))?,
        element_similarity: zero_is_none(cosine_similarity(&hidden(a, all)?, &hidden(b, all)?))?,
        a: side(model, a)?,
        b: side(model, b)?,
    })
}

/// Extracts elements for both articles with `client`, then compares them.
pub fn case_compare(
    article_a: &Article,
    article_b: &Article,
    model: &FemModel,
    client: &dyn LlmClient,
) -> Result<CaseReport, EvalError> {
    let sample = |article: &Article| -> Result<LabeledSample, EvalError> {
        let elements = extract_elements(article, client)?;
        // The label is a placeholder; only predictions are reported.
        Ok(LabeledSample::new(
            article.clone(),
            elements,
            Label::Information,
            Provenance::External,
        ))
    };
    compare_samples(&sample(article_a)?, &sample(article_b)?, model)
}

fn label_name(l: Label) -> &'static str {
    match l {
        Label::Misinformation => "misinformation",
        Label::Information => "information",
    }
}

impl CaseReport {
    pub fn to_markdown(&self) -> String {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "n/a".into());
        let mut out = String::new();
        let _ = writeln!(out, "# Case comparison: {} vs {}\n", self.a.id, self.b.id);
        let _ = writeln!(out, "| | {} | {} |", self.a.id, self.b.id);
        let _ = writeln!(out, "|---|---|---|");
        let frame = |s: &CaseSide| s.frame.clone().unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "| frame | {} | {} |", frame(&self.a), frame(&self.b));
        for e in FrameElement::ALL {
            let text = |s: &CaseSide| s.elements.get(e).unwrap_or("(absent)").replace('|', "\\|");
            let _ = writeln!(out, "| {} | {} | {} |", e.human_name(), text(&self.a), text(&self.b));
        }
        for (name, a, b, pa, pb) in [
            (
                "classification (text only)",
                self.a.label_text_only,
                self.b.label_text_only,
                self.a.p_misinfo_text_only,
                self.b.p_misinfo_text_only,
            ),
            (
                "classification (with elements)",
                self.a.label_with_elements,
                self.b.label_with_elements,
                self.a.p_misinfo_with_elements,
                self.b.p_misinfo_with_elements,
            ),
        ] {
            let _ = writeln!(
                out,
                "| {name} | {} (p_mis {pa:.4}) | {} (p_mis {pb:.4}) |",
                label_name(a),
                label_name(b)
            );
        }
        let _ = writeln!(out, "\n| similarity | value |\n|---|---|");
        let _ = writeln!(
            out,
            "| encoder body embeddings | {} |",
            fmt(self.encoder_body_similarity)
        );
        let _ = writeln!(out, "| hidden state, body only | {} |", fmt(self.body_similarity));
        let _ = writeln!(
            out,
            "| hidden state, body + elements | {} |",
            fmt(self.element_similarity)
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augmentation::MockClient;
    use crate::encoder::HashingEncoder;
    use crate::evalkit::fixtures::case_study;
    use crate::fem::FemConfig;
    use std::sync::Arc;

    fn model() -> FemModel {
        let cfg = FemConfig {
            hidden_size: 6,
            ..FemConfig::new(3)
        };
        FemModel::init(Arc::new(HashingEncoder::new(12)), &cfg)
    }

    #[test]
    fn same_article_twice() {
        let a = Article::new(
            "a",
            "The council met. Rates rose. People objected. A review was ordered.",
        );
        let r = case_compare(&a, &a, &model(), &MockClient::new(0)).unwrap();
        for s in [r.encoder_body_similarity, r.body_similarity, r.element_similarity] {
            assert!((s.unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(r.a.label_with_elements, r.b.label_with_elements);
        assert_eq!(r.a.label_text_only, r.b.label_text_only);
    }

    #[test]
    fn stored_case_study_renders_problem_definitions() {
        let mk = |id: &str, body: &str, frame: &str, problem: &str| {
            LabeledSample::new(
                Article::new(id, body).with_frame(frame),
                FrameElementSet::from_texts([Some(problem.to_string()), None, None, None]),
                Label::Information,
                Provenance::External,
            )
        };
        let a = mk(
            "political",
            case_study::POLITICAL_EXCERPT,
            "political",
            case_study::POLITICAL_PROBLEM,
        );
        let b = mk(
            "satirical",
            case_study::SATIRICAL_EXCERPT,
            "semantic",
            case_study::SATIRICAL_PROBLEM,
        );
        let md = compare_samples(&a, &b, &model()).unwrap().to_markdown();
        assert!(md.contains(case_study::POLITICAL_PROBLEM));
        assert!(md.contains(case_study::SATIRICAL_PROBLEM));
    }
}
