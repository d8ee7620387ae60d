use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::encoder::{EncoderError, Tokenizer};

/// Published dataset statistics carried as corpus metadata under `"reported"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportedStats {
    pub articles: u64,
    pub average_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub count: usize,
    /// Mean body length in tokens; `None` for an empty corpus.
    pub mean_token_length: Option<f64>,
    pub misinformation: usize,
    pub information: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reported: Option<ReportedStats>,
}

pub fn corpus_stats(corpus: &Corpus, tokenizer: &dyn Tokenizer) -> Result<CorpusStats, EncoderError> {
    let mut total_tokens = 0usize;
    for sample in &corpus.samples {
        total_tokens += tokenizer.tokenize(&sample.article.body)?.len();
    }
    let count = corpus.len();
    let (misinformation, information) = corpus.label_counts();
    let reported = corpus
        .metadata
        .get("reported")
        .and_then(|v| serde_json::from_value(v.clone()).ok());
    Ok(CorpusStats {
        count,
        mean_token_length: (count > 0).then(|| total_tokens as f64 / count as f64),
        misinformation,
        information,
        reported,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Article, FrameElementSet, Label, LabeledSample, Provenance};
    use crate::encoder::HashingEncoder;

    fn sample(id: &str, body: &str) -> LabeledSample {
        LabeledSample::new(
            Article::new(id, body),
            FrameElementSet::empty(),
            Label::Information,
            Provenance::Original,
        )
    }

    #[test]
    fn empty_corpus_has_undefined_mean() {
        let stats = corpus_stats(&Corpus::new("e", vec![]), &HashingEncoder::new(8)).unwrap();
        assert_eq!(stats.count, 0);
        assert_eq!(stats.mean_token_length, None);
    }

    #[test]
    fn mean_of_ten_and_twenty_tokens_is_fifteen() {
        let ten = ["w"; 10].join(" ");
        let twenty = vec!["w"; 20].join(" ");
        let c = Corpus::new("c", vec![sample("a", &ten), sample("b", &twenty)]);
        let stats = corpus_stats(&c, &HashingEncoder::new(8)).unwrap();
        assert_eq!(stats.mean_token_length, Some(15.0));
        assert_eq!((stats.misinformation, stats.information), (0, 2));
    }

    #[test]
    fn reported_table_row_is_echoed() {
        let mut c = Corpus::new("Nuclear Pollution", vec![sample("a", "x")]);
        c.metadata.insert(
            "reported".into(),
            serde_json::json!({"articles": 2431, "average_length": 482}),
        );
        let stats = corpus_stats(&c, &HashingEncoder::new(8)).unwrap();
        let reported = stats.reported.unwrap();
        assert_eq!(reported.articles, 2431);
        assert_eq!(reported.average_length, 482.0);
    }
}
