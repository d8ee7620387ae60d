//! Domain data model shared by every other module: articles, frame elements,
//! labeled samples and corpora, plus JSONL persistence and deterministic
//! splitting.

mod io;
mod split;
mod stats;

pub use io::{load_corpus, parse_corpus, save_corpus, write_corpus, CURRENT_SCHEMA_VERSION};
pub(crate) use split::apportion_by;
pub use split::{split_corpus, SplitSpec, Splits};
pub use stats::{corpus_stats, CorpusStats, ReportedStats};

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

/// One news text. `body` is the narrative; `frame_label` the frame it is told
/// under, drawn from a configured vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_label: Option<String>,
}

impl Article {
    pub fn new(id: impl Into<String>, body: impl Into<String>) -> Self {
        Article {
            id: id.into(),
            title: None,
            body: body.into(),
            source: None,
            topic: None,
            frame_label: None,
        }
    }

    pub fn with_frame(mut self, frame: impl Into<String>) -> Self {
        self.frame_label = Some(frame.into());
        self
    }

    pub fn with_topic(mut self, topic: impl Into<String>) -> Self {
        self.topic = Some(topic.into());
        self
    }

    /// Checks the article-level invariants (non-empty id and body).
    pub fn validate(&self) -> Result<(), SampleError> {
        if self.id.trim().is_empty() {
            return Err(SampleError::EmptyId);
        }
        if self.body.trim().is_empty() {
            return Err(SampleError::EmptyBody { id: self.id.clone() });
        }
        Ok(())
    }
}

/// The four framing elements, in their canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameElement {
    ProblemDefinition,
    CausalInterpretation,
    MoralEvaluation,
    TreatmentRecommendation,
}

impl FrameElement {
    pub const ALL: [FrameElement; 4] = [
        FrameElement::ProblemDefinition,
        FrameElement::CausalInterpretation,
        FrameElement::MoralEvaluation,
        FrameElement::TreatmentRecommendation,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// The JSON key used in corpus files and extraction prompts.
    pub fn key(self) -> &'static str {
        match self {
            FrameElement::ProblemDefinition => "problem_definition",
            FrameElement::CausalInterpretation => "causal_interpretation",
            FrameElement::MoralEvaluation => "moral_evaluation",
            FrameElement::TreatmentRecommendation => "treatment_recommendation",
        }
    }

    /// One-word name used in configuration names (`minus-problem`).
    pub fn short_name(self) -> &'static str {
        match self {
            FrameElement::ProblemDefinition => "problem",
            FrameElement::CausalInterpretation => "causal",
            FrameElement::MoralEvaluation => "moral",
            FrameElement::TreatmentRecommendation => "treatment",
        }
    }

    pub fn human_name(self) -> &'static str {
        match self {
            FrameElement::ProblemDefinition => "problem definition",
            FrameElement::CausalInterpretation => "causal interpretation",
            FrameElement::MoralEvaluation => "moral evaluation",
            FrameElement::TreatmentRecommendation => "treatment recommendation",
        }
    }
}

impl fmt::Display for FrameElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Four element slots; each is either present with non-blank text or
/// explicitly absent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrameElementSet {
    slots: [Option<String>; 4],
}

impl FrameElementSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a set from up to four texts in canonical order. Blank texts are
    /// stored as absent.
    pub fn from_texts<I, S>(texts: I) -> Self
    where
        I: IntoIterator<Item = Option<S>>,
        S: Into<String>,
    {
        let mut set = Self::default();
        for (element, text) in FrameElement::ALL.into_iter().zip(texts) {
            set.set(element, text.map(Into::into));
        }
        set
    }

    pub fn get(&self, element: FrameElement) -> Option<&str> {
        self.slots[element.index()].as_deref()
    }

    pub fn set(&mut self, element: FrameElement, text: Option<String>) {
        self.slots[element.index()] = text.filter(|t| !t.trim().is_empty());
    }

    pub fn is_present(&self, element: FrameElement) -> bool {
        self.slots[element.index()].is_some()
    }

    pub fn present_count(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (FrameElement, Option<&str>)> + '_ {
        FrameElement::ALL.into_iter().map(move |e| (e, self.get(e)))
    }
}

/// Serialized as an object with the four element keys, `null` when absent.
impl Serialize for FrameElementSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(4))?;
        for (element, text) in self.iter() {
            map.serialize_entry(element.key(), &text)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for FrameElementSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Slots {
            #[serde(default)]
            problem_definition: Option<String>,
            #[serde(default)]
            causal_interpretation: Option<String>,
            #[serde(default)]
            moral_evaluation: Option<String>,
            #[serde(default)]
            treatment_recommendation: Option<String>,
        }
        let s = Slots::deserialize(deserializer)?;
        Ok(FrameElementSet::from_texts([
            s.problem_definition,
            s.causal_interpretation,
            s.moral_evaluation,
            s.treatment_recommendation,
        ]))
    }
}

/// 0 = misinformation, 1 = information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub enum Label {
    Misinformation = 0,
    Information = 1,
}

impl Label {
    pub fn as_index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Label> {
        match index {
            0 => Some(Label::Misinformation),
            1 => Some(Label::Information),
            _ => None,
        }
    }
}

impl TryFrom<i64> for Label {
    type Error = SampleError;

    fn try_from(value: i64) -> Result<Self, Self::Error> {
        match value {
            0 => Ok(Label::Misinformation),
            1 => Ok(Label::Information),
            other => Err(SampleError::InvalidLabel(other)),
        }
    }
}

impl From<Label> for u8 {
    fn from(label: Label) -> u8 {
        label as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Original,
    Altered,
    External,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Original => "original",
            Provenance::Altered => "altered",
            Provenance::External => "external",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub article: Article,
    pub elements: FrameElementSet,
    pub label: Label,
    pub provenance: Provenance,
    /// Id of the original article an altered sample was derived from.
    pub derived_from: Option<String>,
    /// Unrecognized top-level JSON keys, preserved on round-trip.
    pub extra: Map<String, Value>,
}

impl LabeledSample {
    pub fn new(article: Article, elements: FrameElementSet, label: Label, provenance: Provenance) -> Self {
        LabeledSample {
            article,
            elements,
            label,
            provenance,
            derived_from: None,
            extra: Map::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.article.id
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("label {0} is not 0 (misinformation) or 1 (information)")]
    InvalidLabel(i64),
    #[error("sample has an empty id")]
    EmptyId,
    #[error("sample {id}: body is empty")]
    EmptyBody { id: String },
    #[error("sample {id}: provenance {provenance} requires label {expected:?}")]
    ProvenanceLabelMismatch {
        id: String,
        provenance: Provenance,
        expected: Label,
    },
}

/// Returns the sample unchanged if every invariant holds.
pub fn validate_sample(sample: LabeledSample) -> Result<LabeledSample, SampleError> {
    sample.article.validate()?;
    let expected = match sample.provenance {
        Provenance::Original => Some(Label::Information),
        Provenance::Altered => Some(Label::Misinformation),
        Provenance::External => None,
    };
    if let Some(expected) = expected {
        if sample.label != expected {
            return Err(SampleError::ProvenanceLabelMismatch {
                id: sample.article.id.clone(),
                provenance: sample.provenance,
                expected,
            });
        }
    }
    Ok(sample)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub name: String,
    pub samples: Vec<LabeledSample>,
    pub schema_version: u32,
    /// Free-form corpus metadata (persisted in a sidecar file).
    pub metadata: Map<String, Value>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, samples: Vec<LabeledSample>) -> Self {
        Corpus {
            name: name.into(),
            samples,
            schema_version: CURRENT_SCHEMA_VERSION,
            metadata: Map::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// (misinformation, information) counts.
    pub fn label_counts(&self) -> (usize, usize) {
        let info = self.samples.iter().filter(|s| s.label == Label::Information).count();
        (self.samples.len() - info, info)
    }

    pub fn get(&self, id: &str) -> Option<&LabeledSample> {
        self.samples.iter().find(|s| s.id() == id)
    }

    /// Validates every sample and checks id uniqueness.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let mut seen = std::collections::HashSet::new();
        for (i, sample) in self.samples.iter().enumerate() {
            validate_sample(sample.clone()).map_err(|source| CorpusError::InvalidSample { line: i + 1, source })?;
            if !seen.insert(sample.id()) {
                return Err(CorpusError::DuplicateId {
                    id: sample.id().to_string(),
                    line: i + 1,
                });
            }
        }
        Ok(())
    }

    /// Original → altered id pairs, in corpus order of the altered samples.
    pub fn pairs(&self) -> Vec<(&LabeledSample, &LabeledSample)> {
        let originals: std::collections::HashMap<&str, &LabeledSample> = self
            .samples
            .iter()
            .filter(|s| s.provenance == Provenance::Original)
            .map(|s| (s.id(), s))
            .collect();
        self.samples
            .iter()
            .filter(|s| s.provenance == Provenance::Altered)
            .filter_map(|alt| {
                let parent = alt.derived_from.as_deref()?;
                originals.get(parent).map(|orig| (*orig, alt))
            })
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error on line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("invalid sample on line {line}: {source}")]
    InvalidSample {
        line: usize,
        #[source]
        source: SampleError,
    },
    #[error("duplicate id {id:?} on line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("unsupported corpus schema version {0}")]
    UnsupportedSchema(u32),
    #[error("invalid split specification: {0}")]
    InvalidSplit(String),
    #[error("too few samples: {available} cannot fill splits of sizes {sizes:?}")]
    TooFewSamples { available: usize, sizes: [usize; 3] },
}
