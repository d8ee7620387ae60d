use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AugmentError;

pub const TASK_IDENTIFY: &str = "identify-frame";
pub const TASK_ALTER: &str = "alter-frame";
pub const TASK_EXTRACT: &str = "extract-elements";
pub(crate) const ARTICLE_OPEN: &str = "\n<<<\n";
pub(crate) const ARTICLE_CLOSE: &str = "\n>>>";

/// A named, versioned prompt with `{placeholder}` slots. A placeholder is a
/// brace-delimited run of lowercase letters and underscores; any other brace
/// is literal text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub name: String,
    pub version: u32,
    pub template: String,
}

enum Piece<'a> {
    Text(&'a str),
    Slot(&'a str),
}

fn pieces(template: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        let len = after
            .bytes()
            .take_while(|b| b.is_ascii_lowercase() || *b == b'_')
            .count();
        if len > 0 && after.as_bytes().get(len) == Some(&b'}') {
            out.push(Piece::Text(&rest[..open]));
            out.push(Piece::Slot(&after[..len]));
            rest = &after[len + 1..];
        } else {
            out.push(Piece::Text(&rest[..=open]));
            rest = after;
        }
    }
    out.push(Piece::Text(rest));
    out
}

impl PromptTemplate {
    pub fn new(name: impl Into<String>, version: u32, template: impl Into<String>) -> Self {
        PromptTemplate {
            name: name.into(),
            version,
            template: template.into(),
        }
    }

    pub fn placeholders(&self) -> Vec<&str> {
        let mut names: Vec<&str> = pieces(&self.template)
            .into_iter()
            .filter_map(|p| match p {
                Piece::Slot(s) => Some(s),
                Piece::Text(_) => None,
            })
            .collect();
        names.sort_unstable();
        names.dedup();
        names
    }

    /// Substitutes every placeholder in one pass; bound values are inserted
    /// verbatim and never re-scanned.
    pub fn render(&self, bindings: &[(&str, &str)]) -> Result<String, AugmentError> {
        let mut out = String::with_capacity(self.template.len());
        for piece in pieces(&self.template) {
            match piece {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot(name) => {
                    let value = bindings
                        .iter()
                        .find(|(k, _)| *k == name)
                        .map(|(_, v)| *v)
                        .ok_or_else(|| {
                            AugmentError::Template(format!("{} v{}: unbound {{{name}}}", self.name, self.version))
                        })?;
                    out.push_str(value);
                }
            }
        }
        Ok(out)
    }
}

/// The three prompts the pipeline uses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSet {
    pub identify: PromptTemplate,
    pub alter: PromptTemplate,
    pub extract: PromptTemplate,
}

impl Default for PromptSet {
    fn default() -> Self {
        PromptSet {
            identify: PromptTemplate::new("identify", 1, include_str!("../../prompts/identify.v1.txt")),
            alter: PromptTemplate::new("alter", 1, include_str!("../../prompts/alter.v1.txt")),
            extract: PromptTemplate::new("extract", 1, include_str!("../../prompts/extract.v1.txt")),
        }
    }
}

impl PromptSet {
    /// Loads `<name>.v<version>.txt` files from `dir`, keeping the highest
    /// version of each of `identify`, `alter` and `extract`.
    pub fn load_dir(dir: &Path) -> Result<Self, AugmentError> {
        let mut best: BTreeMap<String, PromptTemplate> = BTreeMap::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            let Some(file) = path.file_name().and_then(|f| f.to_str()) else {
                continue;
            };
            let Some(stem) = file.strip_suffix(".txt") else {
                continue;
            };
            let Some((name, version)) = stem.rsplit_once(".v") else {
                continue;
            };
            let Ok(version) = version.parse::<u32>() else { continue };
            if best.get(name).is_some_and(|t| t.version >= version) {
                continue;
            }
            let text = std::fs::read_to_string(&path)?;
            best.insert(name.to_string(), PromptTemplate::new(name, version, text));
        }
        let mut take = |name: &str| {
            best.remove(name)
                .ok_or_else(|| AugmentError::Template(format!("no {name}.v<N>.txt in {}", dir.display())))
        };
        Ok(PromptSet {
            identify: take("identify")?,
            alter: take("alter")?,
            extract: take("extract")?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_binds_every_placeholder() {
        let t = PromptTemplate::new("t", 1, "Frame {frame}; json {\"k\": 1}; {body} / {element_name}");
        assert_eq!(t.placeholders(), ["body", "element_name", "frame"]);
        let out = t
            .render(&[("frame", "political"), ("body", "text {frame}"), ("element_name", "x")])
            .unwrap();
        assert_eq!(out, "Frame political; json {\"k\": 1}; text {frame} / x");
        assert!(matches!(t.render(&[("frame", "p")]), Err(AugmentError::Template(_))));
    }

    #[test]
    fn shipped_prompts_render_clean() {
        let set = PromptSet::default();
        let r = set.identify.render(&[("frames", "a, b"), ("body", "B")]).unwrap();
        assert!(r.contains("TASK: identify-frame") && r.contains("\n<<<\nB\n>>>"));
        let r = set.alter.render(&[("frame", "semantic"), ("body", "B")]).unwrap();
        assert!(PromptTemplate::new("r", 1, r).placeholders().is_empty());
        assert_eq!(set.extract.placeholders(), ["body"]);
    }

    #[test]
    fn load_dir_prefers_latest_version() {
        let dir = tempfile::tempdir().unwrap();
        for (f, t) in [
            ("identify.v1.txt", "old"),
            ("identify.v2.txt", "new {body}"),
            ("alter.v1.txt", "{frame}{body}"),
            ("extract.v3.txt", "{body}"),
            ("notes.md", "x"),
        ] {
            std::fs::write(dir.path().join(f), t).unwrap();
        }
        let set = PromptSet::load_dir(dir.path()).unwrap();
        assert_eq!(
            (set.identify.version, set.identify.template.as_str()),
            (2, "new {body}")
        );
        assert_eq!(set.extract.version, 3);
    }
}
