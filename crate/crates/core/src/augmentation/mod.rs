//! Turns factual articles into paired information/misinformation samples:
//! frame identification with element extraction, frame alteration, and
//! element extraction from the altered text, all through a pluggable
//! text-completion client.

mod cache;
mod client;
mod http;
mod limiter;
mod mock;
mod prompt;
mod review;

pub use cache::{cache_key, CacheEntry, CompletionCache};
pub use client::{ClientError, GenerationParams, LlmClient};
pub use http::{HttpClient, API_KEY_ENV, ENDPOINT_ENV, MODEL_ENV};
pub use limiter::TokenBucket;
pub use mock::{frame_marker, sentences, FaultKind, FaultRule, MockClient, MockTask};
pub use prompt::{PromptSet, PromptTemplate, TASK_ALTER, TASK_EXTRACT, TASK_IDENTIFY};
pub use review::export_review_sample;

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::time::Duration;

use log::{debug, warn};
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{Article, Corpus, FrameElement, FrameElementSet, Label, LabeledSample, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Validate,
    Identify,
    Alter,
    Extract,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Validate => "validate",
            Phase::Identify => "identify",
            Phase::Alter => "alter",
            Phase::Extract => "extract",
        })
    }
}

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("client failed after {attempts} attempts: {source}")]
    Client { attempts: usize, source: ClientError },
    #[error("unusable completion after {attempts} attempts: {message}")]
    Parse { attempts: usize, message: String },
    #[error("completion has {produced} tokens, below {min_fraction} of the original {original}")]
    DegenerateOutput {
        produced: usize,
        original: usize,
        min_fraction: f64,
    },
    #[error("success rate {rate:.3} is below the floor {floor}")]
    BelowFloor {
        rate: f64,
        floor: f64,
        output: Box<PipelineOutput>,
    },
    #[error("prompt template: {0}")]
    Template(String),
    #[error("invalid settings: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl AugmentError {
    /// Client calls spent before giving up (0 for precondition failures).
    pub fn attempts(&self) -> usize {
        match self {
            AugmentError::Client { attempts, .. } | AugmentError::Parse { attempts, .. } => *attempts,
            AugmentError::DegenerateOutput { .. } => 1,
            _ => 0,
        }
    }
}

pub fn default_frames() -> Vec<String> {
    ["political", "semantic", "economic", "human-interest"]
        .map(String::from)
        .to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentSettings {
    pub frames: Vec<String>,
    /// Seeds target-frame choices (and is passed to the client).
    pub seed: u64,
    pub extraction_temperature: f64,
    pub alteration_temperature: f64,
    pub max_output_tokens: u32,
    /// Tries per call when the client itself fails.
    pub client_attempts: usize,
    /// Extra prompts after a completion that cannot be parsed.
    pub parse_reprompts: usize,
    /// First retry delay; doubles on every further retry.
    pub backoff_ms: u64,
    /// Altered text shorter than this fraction of the original (in
    /// whitespace tokens) is rejected.
    pub min_output_fraction: f64,
    /// Minimum fraction of articles that must yield a full pair.
    pub success_floor: f64,
    pub max_in_flight: usize,
    pub requests_per_second: Option<f64>,
    pub corpus_name: String,
}

impl Default for AugmentSettings {
    fn default() -> Self {
        AugmentSettings {
            frames: default_frames(),
            seed: 0,
            extraction_temperature: 0.0,
            alteration_temperature: 0.8,
            max_output_tokens: 1024,
            client_attempts: 3,
            parse_reprompts: 2,
            backoff_ms: 500,
            min_output_fraction: 0.2,
            success_floor: 0.5,
            max_in_flight: 4,
            requests_per_second: None,
            corpus_name: "augmented".into(),
        }
    }
}

impl AugmentSettings {
    pub fn validate(&self) -> Result<(), AugmentError> {
        let bad = |m: &str| Err(AugmentError::Config(m.to_string()));
        let unique: HashSet<&String> = self.frames.iter().collect();
        if self.frames.len() < 2 || unique.len() != self.frames.len() {
            return bad("frames must list at least two distinct frames");
        }
        if self.frames.iter().any(|f| f.trim().is_empty() || f.contains(',')) {
            return bad("frame names must be non-empty and contain no commas");
        }
        if self.client_attempts == 0 || self.max_in_flight == 0 || self.max_output_tokens == 0 {
            return bad("client_attempts, max_in_flight and max_output_tokens must be positive");
        }
        if !(self.extraction_temperature >= 0.0 && self.alteration_temperature >= 0.0) {
            return bad("temperatures must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.min_output_fraction) || !(0.0..=1.0).contains(&self.success_floor) {
            return bad("min_output_fraction and success_floor must lie in [0, 1]");
        }
        if self.requests_per_second.is_some_and(|r| r.is_nan() || r <= 0.0) {
            return bad("requests_per_second must be positive");
        }
        Ok(())
    }
}

/// One excluded article (or half of a pair) and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarantineRecord {
    pub article_id: String,
    pub phase: Phase,
    pub error: String,
    pub attempts: usize,
}

pub fn write_quarantine<W: Write>(records: &[QuarantineRecord], mut writer: W) -> Result<(), AugmentError> {
    for r in records {
        serde_json::to_writer(&mut writer, r).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub corpus: Corpus,
    pub quarantine: Vec<QuarantineRecord>,
    pub articles: usize,
    /// Articles that produced both samples.
    pub paired: usize,
}

impl PipelineOutput {
    pub fn success_rate(&self) -> f64 {
        if self.articles == 0 {
            0.0
        } else {
            self.paired as f64 / self.articles as f64
        }
    }
}

/// Drives the client through the three phases with caching, retries and
/// rate limiting.
pub struct Augmenter<'a> {
    client: &'a dyn LlmClient,
    settings: AugmentSettings,
    prompts: PromptSet,
    cache: Option<&'a CompletionCache>,
    limiter: Option<TokenBucket>,
}

fn strip_fences(text: &str) -> &str {
    let t = text.trim();
    let Some(inner) = t.strip_prefix("```") else { return t };
    let inner = inner.strip_prefix("json").unwrap_or(inner);
    inner.strip_suffix("```").unwrap_or(inner).trim()
}

fn slot_text(v: &Value, key: &str) -> Result<Option<String>, String> {
    match v {
        Value::Null => Ok(None),
        Value::String(s) => {
            let t = s.trim();
            let lower = t.to_ascii_lowercase();
            Ok(
                (!t.is_empty() && !matches!(lower.as_str(), "not found" | "none" | "n/a" | "null"))
                    .then(|| t.to_string()),
            )
        }
        _ => Err(format!("\"{key}\" must be a string or null")),
    }
}

/// Parses the four-key element object (plus `frame` when `with_frame`).
fn parse_elements(text: &str, with_frame: bool) -> Result<(Option<String>, FrameElementSet), String> {
    let value: Value = serde_json::from_str(strip_fences(text)).map_err(|e| format!("not JSON: {e}"))?;
    let Value::Object(map) = value else {
        return Err("not a JSON object".into());
    };
    let mut expected: Vec<&str> = FrameElement::ALL.iter().map(|e| e.key()).collect();
    if with_frame {
        expected.push("frame");
    }
    if let Some(k) = map.keys().find(|k| !expected.contains(&k.as_str())) {
        return Err(format!("unexpected key \"{k}\""));
    }
    let mut set = FrameElementSet::empty();
    for e in FrameElement::ALL {
        let v = map.get(e.key()).ok_or_else(|| format!("missing key \"{}\"", e.key()))?;
        set.set(e, slot_text(v, e.key())?);
    }
    let frame = if with_frame {
        let v = map.get("frame").ok_or("missing key \"frame\"")?;
        Some(slot_text(v, "frame")?.ok_or("frame is empty")?)
    } else {
        None
    };
    Ok((frame, set))
}

fn token_count(text: &str) -> usize {
    text.split_whitespace().count()
}

impl<'a> Augmenter<'a> {
    pub fn new(client: &'a dyn LlmClient, settings: AugmentSettings) -> Result<Self, AugmentError> {
        settings.validate()?;
        let limiter = settings
            .requests_per_second
            .map(|r| TokenBucket::new(r, settings.max_in_flight as u32));
        Ok(Augmenter {
            client,
            settings,
            prompts: PromptSet::default(),
            cache: None,
            limiter,
        })
    }

    pub fn with_cache(mut self, cache: &'a CompletionCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_prompts(mut self, prompts: PromptSet) -> Self {
        self.prompts = prompts;
        self
    }

    pub fn settings(&self) -> &AugmentSettings {
        &self.settings
    }

    fn params(&self, temperature: f64) -> GenerationParams {
        GenerationParams {
            temperature,
            max_output_tokens: self.settings.max_output_tokens,
            seed: Some(self.settings.seed),
        }
    }

    /// One completion: cache first, then the client with exponential
    /// backoff. Returns the text and the number of client calls made.
    fn call(
        &self,
        template: &PromptTemplate,
        prompt: &str,
        params: &GenerationParams,
    ) -> Result<(String, usize), AugmentError> {
        let key = cache_key(template, prompt, params);
        if let Some(hit) = self.cache.and_then(|c| c.get(&key)) {
            return Ok((hit, 0));
        }
        let mut attempt = 0;
        loop {
            attempt += 1;
            if let Some(l) = &self.limiter {
                l.acquire();
            }
            match self.client.complete(prompt, params) {
                Ok(text) => {
                    if let Some(c) = self.cache {
                        c.put(&key, &text)?;
                    }
                    return Ok((text, attempt));
                }
                Err(e) if attempt >= self.settings.client_attempts => {
                    return Err(AugmentError::Client {
                        attempts: attempt,
                        source: e,
                    });
                }
                Err(e) => {
                    let delay = self.settings.backoff_ms.saturating_mul(1 << (attempt - 1).min(16));
                    debug!("client error ({e}); retrying in {delay} ms");
                    std::thread::sleep(Duration::from_millis(delay));
                }
            }
        }
    }

    /// Calls until `parse` accepts the completion, re-prompting with the
    /// parse error appended.
    fn structured<T>(
        &self,
        template: &PromptTemplate,
        prompt: &str,
        params: &GenerationParams,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, AugmentError> {
        let mut calls = 0;
        let mut last = String::new();
        for round in 0..=self.settings.parse_reprompts {
            let current = if round == 0 {
                prompt.to_string()
            } else {
                format!("{prompt}\nYour previous reply could not be used ({last}). Reply again, following the instructions exactly.\n")
            };
            let (text, n) = self.call(template, &current, params).map_err(|e| match e {
                AugmentError::Client { attempts, source } => AugmentError::Client {
                    attempts: attempts + calls,
                    source,
                },
                other => other,
            })?;
            calls += n;
            match parse(&text) {
                Ok(v) => return Ok(v),
                Err(e) => last = e,
            }
        }
        Err(AugmentError::Parse {
            attempts: calls.max(1),
            message: last,
        })
    }

    fn canonical_frame(&self, frame: &str) -> Option<&str> {
        self.settings
            .frames
            .iter()
            .find(|f| f.eq_ignore_ascii_case(frame.trim()))
            .map(String::as_str)
    }

    /// Phase one: the article's frame (from the vocabulary) and its elements.
    pub fn identify_frame_and_elements(&self, article: &Article) -> Result<(String, FrameElementSet), AugmentError> {
        article
            .validate()
            .map_err(|e| AugmentError::Precondition(e.to_string()))?;
        let t = &self.prompts.identify;
        let frames = self.settings.frames.join(", ");
        let prompt = t.render(&[("frames", &frames), ("body", &article.body)])?;
        self.structured(t, &prompt, &self.params(self.settings.extraction_temperature), |text| {
            let (frame, set) = parse_elements(text, true)?;
            let frame = frame.unwrap();
            let canonical = self
                .canonical_frame(&frame)
                .ok_or_else(|| format!("frame \"{frame}\" is not one of: {frames}"))?;
            Ok((canonical.to_string(), set))
        })
    }

    /// Phase two: the article rewritten under `target_frame`.
    pub fn alter_frame(&self, article: &Article, target_frame: &str) -> Result<Article, AugmentError> {
        article
            .validate()
            .map_err(|e| AugmentError::Precondition(e.to_string()))?;
        let target = self
            .canonical_frame(target_frame)
            .ok_or_else(|| AugmentError::Precondition(format!("frame \"{target_frame}\" is not in the vocabulary")))?;
        if article
            .frame_label
            .as_deref()
            .is_some_and(|f| f.eq_ignore_ascii_case(target))
        {
            return Err(AugmentError::Precondition(format!(
                "article {} is already {target}",
                article.id
            )));
        }
        let t = &self.prompts.alter;
        let prompt = t.render(&[("frame", target), ("body", &article.body)])?;
        let (text, _) = self.call(t, &prompt, &self.params(self.settings.alteration_temperature))?;
        let body = text.trim().to_string();
        let (produced, original) = (token_count(&body), token_count(&article.body));
        if body.is_empty() || (produced as f64) < self.settings.min_output_fraction * original as f64 {
            return Err(AugmentError::DegenerateOutput {
                produced,
                original,
                min_fraction: self.settings.min_output_fraction,
            });
        }
        Ok(Article {
            id: altered_id(&article.id, target),
            title: None,
            body,
            source: article.source.clone(),
            topic: article.topic.clone(),
            frame_label: Some(target.to_string()),
        })
    }

    /// Phase three: elements of an (altered) article.
    pub fn extract_elements(&self, article: &Article) -> Result<FrameElementSet, AugmentError> {
        article
            .validate()
            .map_err(|e| AugmentError::Precondition(e.to_string()))?;
        let t = &self.prompts.extract;
        let prompt = t.render(&[("body", &article.body)])?;
        self.structured(t, &prompt, &self.params(self.settings.extraction_temperature), |text| {
            parse_elements(text, false).map(|(_, set)| set)
        })
    }

    /// Deterministic target frame for an article: uniform over the
    /// vocabulary minus `current`, seeded by the settings seed and the id.
    pub fn choose_target_frame(&self, article_id: &str, current: &str) -> String {
        let mut h = Sha256::new();
        h.update(self.settings.seed.to_le_bytes());
        h.update(article_id.as_bytes());
        let seed = u64::from_le_bytes(h.finalize()[..8].try_into().unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let candidates: Vec<&String> = self.settings.frames.iter().filter(|f| *f != current).collect();
        (*candidates.choose(&mut rng).expect("vocabulary has another frame")).clone()
    }

    fn process(&self, article: &Article) -> (Option<LabeledSample>, Option<LabeledSample>, Option<QuarantineRecord>) {
        let quarantine = |phase: Phase, e: AugmentError| {
            warn!("quarantined {} in {phase}: {e}", article.id);
            Some(QuarantineRecord {
                article_id: article.id.clone(),
                phase,
                attempts: e.attempts(),
                error: e.to_string(),
            })
        };
        if let Err(e) = article.validate() {
            return (
                None,
                None,
                quarantine(Phase::Validate, AugmentError::Precondition(e.to_string())),
            );
        }
        let (frame, elements) = match self.identify_frame_and_elements(article) {
            Ok(v) => v,
            Err(e) => return (None, None, quarantine(Phase::Identify, e)),
        };
        let framed = Article {
            frame_label: Some(frame.clone()),
            ..article.clone()
        };
        let original = LabeledSample::new(framed.clone(), elements, Label::Information, Provenance::Original);
        let target = self.choose_target_frame(&article.id, &frame);
        let altered = match self.alter_frame(&framed, &target) {
            Ok(a) => a,
            Err(e) => return (Some(original), None, quarantine(Phase::Alter, e)),
        };
        match self.extract_elements(&altered) {
            Ok(elements) => {
                let mut sample = LabeledSample::new(altered, elements, Label::Misinformation, Provenance::Altered);
                sample.derived_from = Some(article.id.clone());
                (Some(original), Some(sample), None)
            }
            Err(e) => (Some(original), None, quarantine(Phase::Extract, e)),
        }
    }

    /// Runs all three phases over `articles`. Each article yields an
    /// original sample (label 1) followed by its altered counterpart
    /// (label 0), in input order; failures are quarantined instead. Fails
    /// with `BelowFloor` (carrying the partial output) when too few articles
    /// produce a full pair.
    pub fn build_paired_corpus(&self, articles: &[Article]) -> Result<PipelineOutput, AugmentError> {
        if articles.is_empty() {
            return Err(AugmentError::Precondition("no input articles".into()));
        }
        let mut seen = HashSet::new();
        for a in articles {
            if !seen.insert(a.id.as_str()) {
                return Err(AugmentError::Precondition(format!("duplicate article id {}", a.id)));
            }
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.settings.max_in_flight)
            .build()
            .map_err(|e| AugmentError::Config(e.to_string()))?;
        let results: Vec<_> = pool.install(|| articles.par_iter().map(|a| self.process(a)).collect());

        let mut samples = Vec::new();
        let mut quarantine = Vec::new();
        let mut paired = 0;
        for (original, altered, q) in results {
            paired += usize::from(altered.is_some());
            samples.extend(original);
            samples.extend(altered);
            quarantine.extend(q);
        }
        let mut corpus = Corpus::new(self.settings.corpus_name.clone(), samples);
        corpus.metadata.insert(
            "augmentation".into(),
            json!({
                "client": self.client.name(),
                "seed": self.settings.seed,
                "frames": self.settings.frames,
                "prompts": {
                    "identify": self.prompts.identify.version,
                    "alter": self.prompts.alter.version,
                    "extract": self.prompts.extract.version,
                },
            }),
        );
        let output = PipelineOutput {
            corpus,
            quarantine,
            articles: articles.len(),
            paired,
        };
        let rate = output.success_rate();
        if rate < self.settings.success_floor {
            return Err(AugmentError::BelowFloor {
                rate,
                floor: self.settings.success_floor,
                output: Box::new(output),
            });
        }
        Ok(output)
    }
}

/// Id of the variant of `id` altered to `frame`.
pub fn altered_id(id: &str, frame: &str) -> String {
    format!("{id}-alt-{frame}")
}

/// Phase one with default settings.
pub fn identify_frame_and_elements(
    article: &Article,
    client: &dyn LlmClient,
) -> Result<(String, FrameElementSet), AugmentError> {
    Augmenter::new(client, AugmentSettings::default())?.identify_frame_and_elements(article)
}

/// Phase two with default settings.
pub fn alter_frame(article: &Article, target_frame: &str, client: &dyn LlmClient) -> Result<Article, AugmentError> {
    Augmenter::new(client, AugmentSettings::default())?.alter_frame(article, target_frame)
}

/// Phase three with default settings.
pub fn extract_elements(article: &Article, client: &dyn LlmClient) -> Result<FrameElementSet, AugmentError> {
    Augmenter::new(client, AugmentSettings::default())?.extract_elements(article)
}

/// The full pipeline.
pub fn build_paired_corpus(
    articles: &[Article],
    client: &dyn LlmClient,
    settings: AugmentSettings,
) -> Result<PipelineOutput, AugmentError> {
    Augmenter::new(client, settings)?.build_paired_corpus(articles)
}
