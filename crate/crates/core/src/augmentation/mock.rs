use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::client::{ClientError, GenerationParams, LlmClient};
use super::prompt::{ARTICLE_CLOSE, ARTICLE_OPEN, TASK_ALTER, TASK_EXTRACT, TASK_IDENTIFY};

/// Which prompt kind a fault applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MockTask {
    Identify,
    Alter,
    Extract,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FaultKind {
    /// Returns a transport error.
    Transport,
    /// Returns text that is not the requested structure.
    Garbage,
    /// Returns a near-empty completion.
    Truncated,
}

/// Injected failure: applies to prompts of `task` whose article text
/// contains `marker`, for the first `times` matching calls (all of them when
/// `None`).
#[derive(Debug, Clone)]
pub struct FaultRule {
    pub task: MockTask,
    pub marker: String,
    pub kind: FaultKind,
    pub times: Option<usize>,
}

/// Rule-based stand-in for a generative model. Output is a pure function of
/// the prompt and the client seed (fault rules aside).
///
/// - extraction (with or without frame identification): the first four
///   sentences of the article become the four elements, in order; missing
///   sentences give `null`. The frame is picked from the listed vocabulary by
///   hashing the article with the seed.
/// - alteration: every sentence is prefixed with a marker for the target
///   frame; the semantic frame uses "Oh, boy!".
#[derive(Debug, Default)]
pub struct MockClient {
    seed: u64,
    faults: Vec<FaultRule>,
    fired: Mutex<Vec<usize>>,
    calls: AtomicUsize,
}

pub fn sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        current.push(c);
        if matches!(c, '.' | '!' | '?') && chars.peek().is_none_or(|n| n.is_whitespace()) {
            let s = current.trim();
            if !s.is_empty() {
                out.push(s.to_string());
            }
            current.clear();
        }
    }
    let s = current.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
    out
}

pub fn frame_marker(frame: &str) -> String {
    match frame {
        "semantic" => "Oh, boy!".into(),
        "political" => "Politically speaking,".into(),
        "economic" => "In economic terms,".into(),
        "human-interest" => "On a human level,".into(),
        other => format!("[{other}]"),
    }
}

fn line_value<'a>(prompt: &'a str, prefix: &str) -> Option<&'a str> {
    prompt.lines().find_map(|l| l.strip_prefix(prefix)).map(str::trim)
}

fn article_text(prompt: &str) -> Option<&str> {
    let start = prompt.find(ARTICLE_OPEN)? + ARTICLE_OPEN.len();
    let end = start + prompt[start..].rfind(ARTICLE_CLOSE)?;
    Some(prompt[start..end].trim())
}

impl MockClient {
    pub fn new(seed: u64) -> Self {
        MockClient {
            seed,
            ..Default::default()
        }
    }

    pub fn with_fault(mut self, rule: FaultRule) -> Self {
        self.faults.push(rule);
        self.fired.get_mut().unwrap().push(0);
        self
    }

    /// Number of `complete` calls so far.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    fn pick_frame(&self, body: &str, frames: &[&str]) -> String {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(body.as_bytes());
        let digest = h.finalize();
        let x = u64::from_le_bytes(digest[..8].try_into().unwrap());
        frames[(x % frames.len() as u64) as usize].to_string()
    }

    fn elements_json(body: &str) -> serde_json::Map<String, Value> {
        let s = sentences(body);
        let keys = [
            "problem_definition",
            "causal_interpretation",
            "moral_evaluation",
            "treatment_recommendation",
        ];
        keys.iter()
            .enumerate()
            .map(|(i, k)| {
                (
                    k.to_string(),
                    s.get(i).map_or(Value::Null, |t| Value::String(t.clone())),
                )
            })
            .collect()
    }

    fn fault(&self, task: MockTask, body: &str) -> Option<FaultKind> {
        let mut fired = self.fired.lock().unwrap();
        for (i, rule) in self.faults.iter().enumerate() {
            if rule.task == task && body.contains(&rule.marker) && rule.times.is_none_or(|t| fired[i] < t) {
                fired[i] += 1;
                return Some(rule.kind.clone());
            }
        }
        None
    }
}

impl LlmClient for MockClient {
    fn complete(&self, prompt: &str, _params: &GenerationParams) -> Result<String, ClientError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let task = match line_value(prompt, "TASK:") {
            Some(TASK_IDENTIFY) => MockTask::Identify,
            Some(TASK_ALTER) => MockTask::Alter,
            Some(TASK_EXTRACT) => MockTask::Extract,
            _ => return Ok("I am not sure what you are asking for.".into()),
        };
        let body = article_text(prompt).unwrap_or("");
        match self.fault(task, body) {
            Some(FaultKind::Transport) => return Err(ClientError::Transport("injected fault".into())),
            Some(FaultKind::Garbage) => return Ok("Sure! Here is what I found: nothing structured.".into()),
            Some(FaultKind::Truncated) => return Ok("Oh.".into()),
            None => {}
        }
        match task {
            MockTask::Extract => Ok(Value::Object(Self::elements_json(body)).to_string()),
            MockTask::Identify => {
                let frames: Vec<&str> = line_value(prompt, "FRAMES:")
                    .unwrap_or("")
                    .split(',')
                    .map(str::trim)
                    .filter(|f| !f.is_empty())
                    .collect();
                if frames.is_empty() {
                    return Ok("No frames were listed.".into());
                }
                let mut obj = serde_json::Map::new();
                obj.insert("frame".into(), json!(self.pick_frame(body, &frames)));
                obj.extend(Self::elements_json(body));
                Ok(Value::Object(obj).to_string())
            }
            MockTask::Alter => {
                let marker = frame_marker(line_value(prompt, "TARGET FRAME:").unwrap_or("unknown"));
                Ok(sentences(body)
                    .iter()
                    .map(|s| format!("{marker} {s}"))
                    .collect::<Vec<_>>()
                    .join(" "))
            }
        }
    }

    fn name(&self) -> String {
        format!("mock(seed={})", self.seed)
    }
}
