//! Consolidated Markdown report over a run directory.
//!
//! Each command writes fixed file names into its output directory. The
//! report looks in the run directory and its immediate subdirectories and
//! links everything with relative paths, so the directory can be moved.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{AblationResults, EvalError, MetricSet, SimilarityReport};

pub const MANIFEST: &str = "manifest.json";
pub const CHECKPOINT_DIR: &str = "checkpoint";
pub const HISTORY_CSV: &str = "history.csv";
pub const F1_CURVE_SVG: &str = "f1_curve.svg";
pub const METRICS_JSON: &str = "metrics.json";
pub const ABLATION_CSV: &str = "ablation.csv";
pub const ABLATION_JSON: &str = "ablation.json";
pub const ABLATION_TRACES_CSV: &str = "f1_traces.csv";
pub const ABLATION_SVG: &str = "ablation_f1.svg";
pub const SIMILARITY_JSON: &str = "similarity.json";
pub const SIMILARITY_CSV: &str = "similarity.csv";
pub const SIMILARITY_SVG: &str = "similarity_scatter.svg";
pub const COMPARE_MD: &str = "compare.md";
pub const COMPARE_JSON: &str = "compare.json";
pub const REPORT_MD: &str = "report.md";

/// Files that mark a completed run of some command.
pub const RUN_MARKERS: [&str; 5] = [HISTORY_CSV, METRICS_JSON, ABLATION_JSON, SIMILARITY_JSON, COMPARE_MD];

fn rel(root: &Path, p: &Path) -> String {
    p.strip_prefix(root)
        .unwrap_or(p)
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

fn candidate_dirs(root: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut dirs = vec![root.to_path_buf()];
    let mut subs: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir() && p.file_name().is_some_and(|n| n != CHECKPOINT_DIR))
        .collect();
    subs.sort();
    dirs.extend(subs);
    Ok(dirs)
}

fn read_json<T: serde::de::DeserializeOwned>(p: &Path) -> Result<T, EvalError> {
    let text = fs::read_to_string(p)?;
    serde_json::from_str(&text).map_err(|e| {
        EvalError::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("{}: {e}", p.display()),
        ))
    })
}

fn metric_line(name: &str, m: &MetricSet) -> String {
    format!(
        "| {name} | {:.4} | {:.4} | {:.4} | {:.4} |\n",
        m.accuracy, m.precision, m.recall, m.f1
    )
}

/// Renders `report.md` content for `run_dir`, or lists what is missing when
/// no completed run is found.
pub fn render_report(run_dir: &Path) -> Result<String, EvalError> {
    if !run_dir.is_dir() {
        return Err(EvalError::MissingArtifacts(vec![run_dir.display().to_string()]));
    }
    let mut out = String::from("# Run report\n");
    let mut sections = 0usize;
    for dir in candidate_dirs(run_dir)? {
        let has = |name: &str| dir.join(name).is_file();
        if !RUN_MARKERS.iter().any(|m| has(m)) {
            continue;
        }
        let label = match rel(run_dir, &dir) {
            s if s.is_empty() => ".".to_string(),
            s => s,
        };
        let link = |name: &str| rel(run_dir, &dir.join(name));
        let mut missing = Vec::new();

        if has(HISTORY_CSV) {
            sections += 1;
            let _ = writeln!(out, "\n## Training ({label})\n");
            let _ = writeln!(out, "History: [{HISTORY_CSV}]({})\n", link(HISTORY_CSV));
            if has(F1_CURVE_SVG) {
                let _ = writeln!(out, "![validation F1 per epoch]({})", link(F1_CURVE_SVG));
            } else {
                missing.push(F1_CURVE_SVG);
            }
        }
        if has(METRICS_JSON) {
            sections += 1;
            let m: MetricSet = read_json(&dir.join(METRICS_JSON))?;
            let _ = writeln!(out, "\n## Evaluation ({label})\n");
            out.push_str("| | accuracy | precision | recall | F1 |\n|---|---|---|---|---|\n");
            out.push_str(&metric_line("model", &m));
        }
        if has(ABLATION_JSON) {
            sections += 1;
            let r: AblationResults = read_json(&dir.join(ABLATION_JSON))?;
            let _ = writeln!(out, "\n## Ablation ({label})\n");
            out.push_str("| configuration | accuracy | precision | recall | F1 |\n|---|---|---|---|---|\n");
            for row in &r.rows {
                match row.metrics() {
                    Some(m) => out.push_str(&metric_line(&row.name, m)),
                    None => {
                        let _ = writeln!(out, "| {} | failed | | | |", row.name);
                    }
                }
            }
            if has(ABLATION_SVG) {
                let _ = writeln!(out, "\n![F1 per epoch by configuration]({})", link(ABLATION_SVG));
            } else if r.rows.iter().any(|row| !row.f1_trace().is_empty()) {
                missing.push(ABLATION_SVG);
            }
        }
        if has(SIMILARITY_JSON) {
            sections += 1;
            let r: SimilarityReport = read_json(&dir.join(SIMILARITY_JSON))?;
            let _ = writeln!(out, "\n## Similarity ({label}, {})\n", r.source);
            out.push_str("| condition | similarity | F1 |\n|---|---|---|\n");
            let fmt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_else(|| "n/a".into());
            for row in &r.rows {
                let _ = writeln!(out, "| {} | {} | {} |", row.condition, fmt(row.similarity), fmt(row.f1));
            }
            let _ = writeln!(out, "\nSpearman correlation (similarity vs F1): {}", fmt(r.spearman));
            if has(SIMILARITY_SVG) {
                let _ = writeln!(out, "\n![similarity against F1]({})", link(SIMILARITY_SVG));
            } else {
                missing.push(SIMILARITY_SVG);
            }
        }
        if has(COMPARE_MD) {
            sections += 1;
            let _ = writeln!(
                out,
                "\n## Case comparison ({label})\n\nSee [{COMPARE_MD}]({}).",
                link(COMPARE_MD)
            );
        }
        if !missing.is_empty() {
            let _ = writeln!(out, "\nMissing in {label}: {}", missing.join(", "));
        }
    }
    if sections == 0 {
        return Err(EvalError::MissingArtifacts(
            RUN_MARKERS.iter().map(|s| s.to_string()).collect(),
        ));
    }
    Ok(out)
}
