use std::io::Write;
use std::sync::Arc;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fixtures::{ResultTable, FEM_FRAMES, FEM_TEXT, FEM_TEXT_FRAMES};
use super::{evaluate, ConfusionCounts, EvalError, MetricSet};
use crate::corpus::{FrameElement, Splits};
use crate::encoder::{ElementMask, SegmentEncoder};
use crate::fem::{train, FemConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationConfig {
    pub name: String,
    pub mask: ElementMask,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationPlan {
    pub configs: Vec<AblationConfig>,
}

impl Default for AblationPlan {
    /// all-4, minus-problem, minus-causal, minus-moral, minus-treatment,
    /// text-only, frames-only.
    fn default() -> Self {
        let mut configs = vec![AblationConfig {
            name: "all-4".into(),
            mask: ElementMask::all(),
        }];
        for e in FrameElement::ALL {
            configs.push(AblationConfig {
                name: format!("minus-{}", e.short_name()),
                mask: ElementMask::all().without(e),
            });
        }
        configs.push(AblationConfig {
            name: "text-only".into(),
            mask: ElementMask::text_only(),
        });
        configs.push(AblationConfig {
            name: "frames-only".into(),
            mask: ElementMask::frames_only(),
        });
        AblationPlan { configs }
    }
}

impl AblationPlan {
    pub fn get(&self, name: &str) -> Option<&AblationConfig> {
        self.configs.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AblationOutcome {
    Completed {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        counts: Option<ConfusionCounts>,
        metrics: MetricSet,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        best_epoch: Option<usize>,
        /// Validation F1 per epoch.
        #[serde(default)]
        f1_trace: Vec<f64>,
    },
    Failed {
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub name: String,
    pub mask: ElementMask,
    #[serde(flatten)]
    pub outcome: AblationOutcome,
}

impl AblationRow {
    pub fn metrics(&self) -> Option<&MetricSet> {
        match &self.outcome {
            AblationOutcome::Completed { metrics, .. } => Some(metrics),
            AblationOutcome::Failed { .. } => None,
        }
    }

    pub fn f1_trace(&self) -> &[f64] {
        match &self.outcome {
            AblationOutcome::Completed { f1_trace, .. } => f1_trace,
            AblationOutcome::Failed { .. } => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationResults {
    pub source: String,
    pub rows: Vec<AblationRow>,
}

impl AblationResults {
    pub fn row(&self, name: &str) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn f1(&self, name: &str) -> Option<f64> {
        self.row(name)?.metrics().map(|m| m.f1)
    }

    /// The three FEM rows of a reference result table, named after the
    /// matching plan entries.
    pub fn from_fixture(table: &ResultTable) -> Self {
        let mapping = [
            (FEM_TEXT_FRAMES, "all-4", ElementMask::all()),
            (FEM_TEXT, "text-only", ElementMask::text_only()),
            (FEM_FRAMES, "frames-only", ElementMask::frames_only()),
        ];
        let rows = mapping
            .iter()
            .filter_map(|(model, name, mask)| {
                let r = table.row(model)?;
                Some(AblationRow {
                    name: name.to_string(),
                    mask: *mask,
                    outcome: AblationOutcome::Completed {
                        counts: None,
                        metrics: MetricSet {
                            accuracy: r.accuracy,
                            precision: r.precision,
                            recall: r.recall,
                            f1: r.f1,
                            degenerate: Default::default(),
                        },
                        best_epoch: None,
                        f1_trace: Vec::new(),
                    },
                })
            })
            .collect();
        AblationResults {
            source: table.key.to_string(),
            rows,
        }
    }

    /// One row per configuration.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), EvalError> {
        let io = |e: csv::Error| EvalError::Io(e.into());
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "configuration",
            "mask",
            "status",
            "accuracy",
            "precision",
            "recall",
            "f1",
            "best_epoch",
            "error",
        ])
        .map_err(io)?;
        for r in &self.rows {
            let mask = r.mask.to_string();
            match &r.outcome {
                AblationOutcome::Completed {
                    metrics: m, best_epoch, ..
                } => w.write_record([
                    r.name.clone(),
                    mask,
                    "completed".into(),
                    m.accuracy.to_string(),
                    m.precision.to_string(),
                    m.recall.to_string(),
                    m.f1.to_string(),
                    best_epoch.map(|e| e.to_string()).unwrap_or_default(),
                    String::new(),
                ]),
                AblationOutcome::Failed { error } => w.write_record([
                    r.name.clone(),
                    mask,
                    "failed".into(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    error.clone(),
                ]),
            }
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Validation F1 per epoch, one column per configuration.
    pub fn write_traces_csv<W: Write>(&self, writer: W) -> Result<(), EvalError> {
        let io = |e: csv::Error| EvalError::Io(e.into());
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["epoch".to_string()];
        header.extend(self.rows.iter().map(|r| r.name.clone()));
        w.write_record(&header).map_err(io)?;
        let epochs = self.rows.iter().map(|r| r.f1_trace().len()).max().unwrap_or(0);
        for e in 0..epochs {
            let mut record = vec![(e + 1).to_string()];
            record.extend(
                self.rows
                    .iter()
                    .map(|r| r.f1_trace().get(e).map(|f| f.to_string()).unwrap_or_default()),
            );
            w.write_record(&record).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Trains one model per plan entry (same seed and hyperparameters, only the
/// element mask differs) and evaluates its best checkpoint on the test split
/// under that mask. Configurations run concurrently; rows keep plan order. A
/// failing configuration is recorded in its row and does not stop the run.
pub fn run_ablation(
    encoder: Arc<dyn SegmentEncoder>,
    splits: &Splits,
    config: &FemConfig,
    plan: &AblationPlan,
) -> Result<AblationResults, EvalError> {
    if plan.configs.is_empty() {
        return Err(EvalError::EmptyPlan);
    }
    let rows = plan
        .configs
        .par_iter()
        .map(|entry| {
            let mut cfg = config.clone();
            cfg.element_mask = entry.mask;
            let result = train(encoder.clone(), &splits.train, &splits.val, &cfg)
                .map_err(EvalError::from)
                .and_then(|out| {
                    let (counts, metrics) = evaluate(&out.model, &splits.test, &entry.mask)?;
                    Ok(AblationOutcome::Completed {
                        counts: Some(counts),
                        metrics,
                        best_epoch: out.best_epoch,
                        f1_trace: out.history.f1_trace(),
                    })
                });
            let outcome = match result {
                Ok(o) => {
                    info!("ablation {}: done", entry.name);
                    o
                }
                Err(e) => {
                    warn!("ablation {} failed: {e}", entry.name);
                    AblationOutcome::Failed { error: e.to_string() }
                }
            };
            AblationRow {
                name: entry.name.clone(),
                mask: entry.mask,
                outcome,
            }
        })
        .collect();
    Ok(AblationResults {
        source: splits.train.name.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;
    use crate::encoder::HashingEncoder;
    use crate::evalkit::fixtures::results;

    #[test]
    fn default_plan_names_and_masks() {
        let plan = AblationPlan::default();
        let names: Vec<_> = plan.configs.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "all-4",
                "minus-problem",
                "minus-causal",
                "minus-moral",
                "minus-treatment",
                "text-only",
                "frames-only"
            ]
        );
        assert_eq!(plan.get("minus-moral").unwrap().mask.to_string(), "11101");
    }

    #[test]
    fn fixture_replay_keeps_ordering_of_accuracy() {
        let r = AblationResults::from_fixture(results("table2").unwrap());
        assert_eq!(r.rows.len(), 3);
        let acc = |n| r.row(n).unwrap().metrics().unwrap().accuracy;
        assert_eq!(acc("all-4"), 0.9862);
        assert!(acc("all-4") > acc("text-only"));
        assert_eq!(acc("text-only"), 0.8652);
    }

    #[test]
    fn failures_are_recorded_per_row() {
        let empty = Corpus::new("e", vec![]);
        let splits = Splits {
            train: empty.clone(),
            val: empty.clone(),
            test: empty,
        };
        let plan = AblationPlan::default();
        let out = run_ablation(Arc::new(HashingEncoder::new(4)), &splits, &FemConfig::new(1), &plan).unwrap();
        assert_eq!(out.rows.len(), 7);
        assert!(out
            .rows
            .iter()
            .all(|r| matches!(r.outcome, AblationOutcome::Failed { .. })));
        let mut csv = Vec::new();
        out.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 8);
        assert!(matches!(
            run_ablation(
                Arc::new(HashingEncoder::new(4)),
                &splits,
                &FemConfig::new(1),
                &AblationPlan { configs: vec![] }
            ),
            Err(EvalError::EmptyPlan)
        ));
    }
}
