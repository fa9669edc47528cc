//! Experiment report: JSON structure plus markdown/CSV table rendering.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::config::Config;
use super::eval::CellStats;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScorePair {
    pub train: f64,
    pub test: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustCell {
    pub add: f64,
    pub drop: f64,
    /// Per-policy stats plus relative change against the clean cell of
    /// the same run; `None` when the clean score is zero.
    pub policies: BTreeMap<String, RobustStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustStats {
    #[serde(flatten)]
    pub stats: CellStats,
    pub rel_change: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrunerStats {
    pub holdout_accuracy: f64,
    pub final_loss: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleSummary {
    pub rules_per_type: BTreeMap<String, usize>,
    /// Up to the five most important rules per type, rendered.
    pub top_rules: BTreeMap<String, Vec<TopRule>>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopRule {
    pub edge: String,
    pub importance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub action: String,
    pub used_type: String,
    pub score: u32,
    pub matched_edges: Vec<String>,
    pub missing_edges: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VocabEcho {
    pub n_tokens: usize,
    pub relations: Vec<String>,
}

/// Everything a run produces, keyed by difficulty where applicable.
/// Deterministic serialization: ordered maps and vectors only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: Config,
    pub vocab: BTreeMap<String, VocabEcho>,
    /// difficulty -> policy -> train/test mean normalized score.
    pub generalization: BTreeMap<String, BTreeMap<String, ScorePair>>,
    /// difficulty -> noise grid (clean cell first).
    pub robustness: BTreeMap<String, Vec<RobustCell>>,
    /// teacher name -> train/test score of the resulting hybrid.
    pub teacher_ablation: BTreeMap<String, ScorePair>,
    /// selector name -> train/test score of the two-step pipeline.
    pub selector_ablation: BTreeMap<String, ScorePair>,
    pub pruner: BTreeMap<String, PrunerStats>,
    pub rulebooks: BTreeMap<String, RuleSummary>,
    /// One clean hybrid episode per difficulty on the first test env.
    pub traces: BTreeMap<String, Vec<StepTrace>>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(s: &str) -> crate::error::Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn fmt_score(v: f64) -> String {
        format!("{:.1}", v * 100.0)
    }

    fn fmt_rel(rel: Option<f64>) -> String {
        match rel {
            Some(r) => format!("{:+.0}%", r * 100.0),
            None => "n/a".to_string(),
        }
    }

    /// The four result tables as markdown.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let difficulties: Vec<&String> = self.generalization.keys().collect();

        out.push_str("# Results\n\n## Generalization (mean normalized score x100)\n\n");
        out.push_str("| policy |");
        for d in &difficulties {
            out.push_str(&format!(" d{d} train | d{d} test |"));
        }
        out.push_str("\n|---|");
        for _ in &difficulties {
            out.push_str("---|---|");
        }
        out.push('\n');
        let mut policies: Vec<&String> = self
            .generalization
            .values()
            .flat_map(|m| m.keys())
            .collect();
        policies.sort();
        policies.dedup();
        for p in policies {
            out.push_str(&format!("| {p} |"));
            for d in &difficulties {
                match self.generalization[*d].get(p) {
                    Some(s) => out.push_str(&format!(
                        " {} | {} |",
                        Self::fmt_score(s.train),
                        Self::fmt_score(s.test)
                    )),
                    None => out.push_str(" - | - |"),
                }
            }
            out.push('\n');
        }

        out.push_str(
            "\n## Robustness on training environments (score x100, change vs clean)\n\n",
        );
        out.push_str("| add | drop |");
        for d in &difficulties {
            out.push_str(&format!(" d{d} q | d{d} hybrid |"));
        }
        out.push_str("\n|---|---|");
        for _ in &difficulties {
            out.push_str("---|---|");
        }
        out.push('\n');
        if let Some(first) = self.robustness.values().next() {
            for (i, cell) in first.iter().enumerate() {
                out.push_str(&format!("| {} | {} |", cell.add, cell.drop));
                for d in &difficulties {
                    let cell = &self.robustness[*d][i];
                    for p in ["q", "hybrid"] {
                        match cell.policies.get(p) {
                            Some(s) => out.push_str(&format!(
                                " {} ({}) |",
                                Self::fmt_score(s.stats.score),
                                Self::fmt_rel(s.rel_change)
                            )),
                            None => out.push_str(" - |"),
                        }
                    }
                }
                out.push('\n');
            }
        }

        if !self.teacher_ablation.is_empty() {
            out.push_str("\n## Teacher ablation (first difficulty)\n\n");
            out.push_str("| teacher | train | test |\n|---|---|---|\n");
            for (name, s) in &self.teacher_ablation {
                out.push_str(&format!(
                    "| {name} | {} | {} |\n",
                    Self::fmt_score(s.train),
                    Self::fmt_score(s.test)
                ));
            }
        }

        if !self.selector_ablation.is_empty() {
            out.push_str("\n## Selector ablation (first difficulty)\n\n");
            out.push_str("| selector | train | test |\n|---|---|---|\n");
            for (name, s) in &self.selector_ablation {
                out.push_str(&format!(
                    "| {name} | {} | {} |\n",
                    Self::fmt_score(s.train),
                    Self::fmt_score(s.test)
                ));
            }
        }
        out
    }

    /// Long-format CSV of every scored cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("table,difficulty,policy,set,add,drop,score,rel_change\n");
        for (d, row) in &self.generalization {
            for (p, s) in row {
                out.push_str(&format!(
                    "generalization,{d},{p},train,0,0,{:.6},\n",
                    s.train
                ));
                out.push_str(&format!("generalization,{d},{p},test,0,0,{:.6},\n", s.test));
            }
        }
        for (d, cells) in &self.robustness {
            for cell in cells {
                for (p, s) in &cell.policies {
                    out.push_str(&format!(
                        "robustness,{d},{p},train,{},{},{:.6},{}\n",
                        cell.add,
                        cell.drop,
                        s.stats.score,
                        s.rel_change.map(|r| format!("{r:.6}")).unwrap_or_default()
                    ));
                }
            }
        }
        for (name, s) in &self.teacher_ablation {
            out.push_str(&format!(
                "teacher_ablation,,{name},train,0,0,{:.6},\n",
                s.train
            ));
            out.push_str(&format!("teacher_ablation,,{name},test,0,0,{:.6},\n", s.test));
        }
        for (name, s) in &self.selector_ablation {
            out.push_str(&format!(
                "selector_ablation,,{name},train,0,0,{:.6},\n",
                s.train
            ));
            out.push_str(&format!(
                "selector_ablation,,{name},test,0,0,{:.6},\n",
                s.test
            ));
        }
        out
    }
}
