use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{validate_sample, Article, Corpus, CorpusError, FrameElementSet, Label, LabeledSample, Provenance};

pub const CURRENT_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SampleRecord {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    title: Option<String>,
    body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    topic: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frame_label: Option<String>,
    label: i64,
    provenance: Provenance,
    #[serde(default)]
    elements: ElementsRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    derived_from: Option<String>,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

#[derive(Default, Serialize, Deserialize)]
struct ElementsRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    problem_definition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    causal_interpretation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    moral_evaluation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    treatment_recommendation: Option<String>,
}

impl From<&LabeledSample> for SampleRecord {
    fn from(s: &LabeledSample) -> Self {
        use super::FrameElement::*;
        let el = |e| s.elements.get(e).map(str::to_string);
        SampleRecord {
            id: s.article.id.clone(),
            title: s.article.title.clone(),
            body: s.article.body.clone(),
            source: s.article.source.clone(),
            topic: s.article.topic.clone(),
            frame_label: s.article.frame_label.clone(),
            label: s.label as i64,
            provenance: s.provenance,
            elements: ElementsRecord {
                problem_definition: el(ProblemDefinition),
                causal_interpretation: el(CausalInterpretation),
                moral_evaluation: el(MoralEvaluation),
                treatment_recommendation: el(TreatmentRecommendation),
            },
            derived_from: s.derived_from.clone(),
            extra: s.extra.clone(),
        }
    }
}

impl SampleRecord {
    fn into_sample(self, line: usize) -> Result<LabeledSample, CorpusError> {
        let label = Label::try_from(self.label).map_err(|source| CorpusError::InvalidSample { line, source })?;
        let e = self.elements;
        let sample = LabeledSample {
            article: Article {
                id: self.id,
                title: self.title,
                body: self.body,
                source: self.source,
                topic: self.topic,
                frame_label: self.frame_label,
            },
            elements: FrameElementSet::from_texts([
                e.problem_definition,
                e.causal_interpretation,
                e.moral_evaluation,
                e.treatment_recommendation,
            ]),
            label,
            provenance: self.provenance,
            derived_from: self.derived_from,
            extra: self.extra,
        };
        validate_sample(sample).map_err(|source| CorpusError::InvalidSample { line, source })
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    name: String,
    schema_version: u32,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    metadata: Map<String, Value>,
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".to_string())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Parses JSONL samples from a reader. Blank lines are skipped; line numbers
/// in errors are 1-based physical lines.
pub fn parse_corpus<R: Read>(name: &str, reader: R) -> Result<Corpus, CorpusError> {
    let mut samples = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| CorpusError::Schema {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SampleRecord = serde_json::from_str(&line).map_err(|e| CorpusError::Schema {
            line: line_no,
            message: e.to_string(),
        })?;
        let sample = record.into_sample(line_no)?;
        if !seen.insert(sample.article.id.clone()) {
            return Err(CorpusError::DuplicateId {
                id: sample.article.id,
                line: line_no,
            });
        }
        samples.push(sample);
    }
    Ok(Corpus::new(name, samples))
}

/// Loads a JSONL corpus, plus its `<stem>.meta.json` sidecar when present.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut corpus = parse_corpus(&stem(path), file)?;

    let meta = sidecar_path(path);
    if meta.exists() {
        let text = fs::read_to_string(&meta).map_err(io_err(&meta))?;
        let sidecar: Sidecar = serde_json::from_str(&text).map_err(|e| CorpusError::Schema {
            line: 0,
            message: format!("{}: {e}", meta.display()),
        })?;
        if sidecar.schema_version == 0 || sidecar.schema_version > CURRENT_SCHEMA_VERSION {
            return Err(CorpusError::UnsupportedSchema(sidecar.schema_version));
        }
        corpus.name = sidecar.name;
        corpus.schema_version = sidecar.schema_version;
        corpus.metadata = sidecar.metadata;
    }
    Ok(corpus)
}

/// Writes samples as JSONL, one per line, in corpus order.
pub fn write_corpus<W: Write>(corpus: &Corpus, mut writer: W) -> std::io::Result<()> {
    for sample in &corpus.samples {
        let line = serde_json::to_string(&SampleRecord::from(sample))?;
        writer.write_all(line.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

/// Saves a corpus to `path`. A sidecar is written only when the name,
/// schema version or metadata cannot be recovered from the file itself.
pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_corpus(corpus, &mut buf).map_err(io_err(path))?;
    fs::write(path, buf).map_err(io_err(path))?;

    let meta = sidecar_path(path);
    let needs_sidecar =
        corpus.name != stem(path) || corpus.schema_version != CURRENT_SCHEMA_VERSION || !corpus.metadata.is_empty();
    if needs_sidecar {
        let sidecar = Sidecar {
            name: corpus.name.clone(),
            schema_version: corpus.schema_version,
            metadata: corpus.metadata.clone(),
        };
        let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
        fs::write(&meta, text + "\n").map_err(io_err(&meta))?;
    } else if meta.exists() {
        fs::remove_file(&meta).map_err(io_err(&meta))?;
    }
    Ok(())
}
