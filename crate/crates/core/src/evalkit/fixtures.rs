//! Reference values from the original FEM study, shipped as data so report
//! formatting and downstream analyses can run offline.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatasetRow {
    pub dataset: &'static str,
    pub articles: usize,
    pub average_length: usize,
}

pub const DATASETS: [DatasetRow; 4] = [
    DatasetRow {
        dataset: "The Three Waters",
        articles: 3262,
        average_length: 823,
    },
    DatasetRow {
        dataset: "Covid-19",
        articles: 13386,
        average_length: 537,
    },
    DatasetRow {
        dataset: "Nuclear Pollution",
        articles: 2431,
        average_length: 482,
    },
    DatasetRow {
        dataset: "Mixed-topic",
        articles: 5915,
        average_length: 469,
    },
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResultRow {
    pub model: &'static str,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResultTable {
    pub key: &'static str,
    pub dataset: &'static str,
    pub rows: [ResultRow; 8],
}

impl ResultTable {
    pub fn row(&self, model: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.model == model)
    }

    /// The three FEM rows (text+frames, only text, only frames).
    pub fn fem_rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| r.model.starts_with("FEM"))
    }
}

pub const FEM_TEXT_FRAMES: &str = "FEM (text+frames)";
pub const FEM_TEXT: &str = "FEM (only text)";
pub const FEM_FRAMES: &str = "FEM (only frames)";

const fn row(model: &'static str, accuracy: f64, precision: f64, recall: f64, f1: f64) -> ResultRow {
    ResultRow {
        model,
        accuracy,
        precision,
        recall,
        f1,
    }
}

pub const RESULTS: [ResultTable; 4] = [
    ResultTable {
        key: "table2",
        dataset: "The Three Waters",
        rows: [
            row("BERT", 0.8469, 0.8188, 0.8127, 0.8157),
            row("RoBERTa", 0.8622, 0.8784, 0.7915, 0.8327),
            row("ALBERT", 0.8086, 0.7651, 0.8057, 0.7849),
            row("XLNet", 0.8545, 0.8113, 0.8657, 0.8376),
            row("LongFormer", 0.8591, 0.8283, 0.8516, 0.8398),
            row(FEM_TEXT_FRAMES, 0.9862, 0.9695, 0.9734, 0.9715),
            row(FEM_TEXT, 0.8652, 0.8316, 0.8638, 0.8474),
            row(FEM_FRAMES, 0.9278, 0.9355, 0.9605, 0.9478),
        ],
    },
    ResultTable {
        key: "table3",
        dataset: "Covid-19",
        rows: [
            row("BERT", 0.8372, 0.8052, 0.8074, 0.8063),
            row("RoBERTa", 0.8547, 0.8539, 0.7867, 0.8190),
            row("ALBERT", 0.8104, 0.7783, 0.8163, 0.7968),
            row("XLNet", 0.8429, 0.8207, 0.8629, 0.8412),
            row("LongFormer", 0.8546, 0.8617, 0.8694, 0.8655),
            row(FEM_TEXT_FRAMES, 0.9783, 0.9583, 0.9708, 0.9645),
            row(FEM_TEXT, 0.8865, 0.8737, 0.8826, 0.8781),
            row(FEM_FRAMES, 0.9132, 0.9195, 0.9361, 0.9277),
        ],
    },
    ResultTable {
        key: "table4",
        dataset: "Nuclear Pollution",
        rows: [
            row("BERT", 0.8035, 0.7921, 0.80167, 0.7969),
            row("RoBERTa", 0.8167, 0.8234, 0.7826, 0.8025),
            row("ALBERT", 0.8051, 0.7568, 0.7864, 0.7713),
            row("XLNet", 0.8268, 0.8035, 0.8284, 0.8158),
            row("LongFormer", 0.8462, 0.8254, 0.8316, 0.8285),
            row(FEM_TEXT_FRAMES, 0.9538, 0.9429, 0.9531, 0.9480),
            row(FEM_TEXT, 0.8491, 0.8365, 0.8537, 0.8450),
            row(FEM_FRAMES, 0.9035, 0.9216, 0.9268, 0.9242),
        ],
    },
    ResultTable {
        key: "table5",
        dataset: "Mixed-topic",
        rows: [
            row("BERT", 0.8354, 0.8127, 0.8165, 0.8146),
            row("RoBERTa", 0.8497, 0.8503, 0.7902, 0.8191),
            row("ALBERT", 0.8126, 0.7816, 0.8257, 0.8030),
            row("XLNet", 0.8528, 0.8320, 0.8783, 0.8545),
            row("LongFormer", 0.8736, 0.8542, 0.8867, 0.8701),
            row(FEM_TEXT_FRAMES, 0.9696, 0.9582, 0.9683, 0.9632),
            row(FEM_TEXT, 0.8823, 0.8574, 0.8929, 0.8748),
            row(FEM_FRAMES, 0.9158, 0.9207, 0.9319, 0.9263),
        ],
    },
];

pub fn results(key: &str) -> Option<&'static ResultTable> {
    RESULTS.iter().find(|t| t.key == key)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilarityFixtureRow {
    pub condition: &'static str,
    pub similarity: f64,
    pub f1: f64,
}

/// One Three Waters article pair: information vs misinformation similarity
/// per condition, with the model's F1 on that dataset under the condition.
pub const SINGLE_ARTICLE_SIMILARITY: [SimilarityFixtureRow; 6] = [
    SimilarityFixtureRow {
        condition: "Article Similarity",
        similarity: 0.86,
        f1: 0.8474,
    },
    SimilarityFixtureRow {
        condition: "Elements Similarity(all 4 elements)",
        similarity: 0.61,
        f1: 0.9478,
    },
    SimilarityFixtureRow {
        condition: "Elements Similarity(without problem)",
        similarity: 0.79,
        f1: 0.9046,
    },
    SimilarityFixtureRow {
        condition: "Elements Similarity(without causal)",
        similarity: 0.62,
        f1: 0.9454,
    },
    SimilarityFixtureRow {
        condition: "Elements Similarity(without moral)",
        similarity: 0.81,
        f1: 0.9065,
    },
    SimilarityFixtureRow {
        condition: "Elements Similarity(without treatment)",
        similarity: 0.64,
        f1: 0.9354,
    },
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AverageSimilarityRow {
    pub condition: &'static str,
    pub three_water: f64,
    pub covid: f64,
    pub nuclear: f64,
    pub mixed: f64,
}

/// Mean pair similarity per condition across the four datasets (no F1).
pub const AVERAGE_SIMILARITY: [AverageSimilarityRow; 6] = [
    AverageSimilarityRow {
        condition: "Article Similarity",
        three_water: 0.86,
        covid: 0.82,
        nuclear: 0.83,
        mixed: 0.85,
    },
    AverageSimilarityRow {
        condition: "Elements Similarity(all 4 elements)",
        three_water: 0.58,
        covid: 0.62,
        nuclear: 0.59,
        mixed: 0.61,
    },
    AverageSimilarityRow {
        condition: "Elements Similarity(without problem)",
        three_water: 0.83,
        covid: 0.81,
        nuclear: 0.82,
        mixed: 0.83,
    },
    AverageSimilarityRow {
        condition: "Elements Similarity(without causal)",
        three_water: 0.59,
        covid: 0.62,
        nuclear: 0.60,
        mixed: 0.63,
    },
    AverageSimilarityRow {
        condition: "Elements Similarity(without moral)",
        three_water: 0.81,
        covid: 0.79,
        nuclear: 0.81,
        mixed: 0.80,
    },
    AverageSimilarityRow {
        condition: "Elements Similarity(without treatment)",
        three_water: 0.60,
        covid: 0.64,
        nuclear: 0.78,
        mixed: 0.63,
    },
];

/// Case study: the same water-reform story told under a political frame and
/// rewritten under a satirical (semantic) frame.
pub mod case_study {
    pub const POLITICAL_EXCERPT: &str = "There's a lot of change being proposed by the government… Fundamentally, they're considering shifting responsibility for our three waters: water supply, wastewater, and stormwater, from local government into four large entities... The government now believes that costs of between $120 billion and $185b will be required: between $4 and $6b per year on average… The proposed three waters reform program harks back to the Havelock North water contamination event in 2016… It's on this basis that the government has concluded that four entities, aggregating all the water services across the country, offer the best and quickest opportunity to achieve the desired improvements to the three-waters networks... It's too early to ask the community...";

    pub const SATIRICAL_EXCERPT: &str = "Oh, boy! The government is proposing some exciting changes, folks. Brace yourselves because they're considering taking control of our beloved three waters. You know, the precious water supply, wastewater, and stormwater that our local government has been responsible for?... The government estimates that we'll need a mind-boggling $120 billion to $185 billion over the next 30 years… Well, now they want to hand it over to these big entities called Water Supply Entities. What a brilliant idea, right?... And get this – the government thinks it would be cheaper if larger entities took over the water services. Apparently, they can borrow more, with the government's backing, of course. I mean, who needs small, local councils when you can have these big entities making all the decisions for you?...";

    pub const POLITICAL_PROBLEM: &str =
        "The proposed shift of responsibility for three waters from local government to four large entities known as water supply entities.";

    pub const SATIRICAL_PROBLEM: &str = "The proposed government takeover of three waters";

    pub const ARTICLE_SIMILARITY: f64 = 0.86;
    pub const ELEMENT_SIMILARITY: f64 = 0.61;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalkit::f1_score;

    #[test]
    fn fem_rows_are_internally_consistent() {
        for table in &RESULTS {
            for r in table.fem_rows() {
                let f1 = f1_score(r.precision, r.recall).unwrap();
                assert!((f1 - r.f1).abs() < 5e-4, "{} {}: {f1} vs {}", table.key, r.model, r.f1);
            }
        }
    }

    #[test]
    fn frames_beat_text_only_everywhere() {
        for table in &RESULTS {
            assert!(table.row(FEM_TEXT_FRAMES).unwrap().accuracy > table.row(FEM_TEXT).unwrap().accuracy);
        }
        assert_eq!(results("table2").unwrap().row(FEM_TEXT).unwrap().accuracy, 0.8652);
    }
}
