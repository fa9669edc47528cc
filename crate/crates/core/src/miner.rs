//! Mining abstract supporting edges per action type from labeled
//! demonstrations.
//!
//! Each demonstration state is abstracted under its own action's
//! bindings, then edge presence is counted per state (set semantics).
//! An edge's importance for a type is `freq_k(e) * ln(1 / freq(e))`:
//! high when the edge is common for that type's states but rare overall.
//! The rule book keeps, per type, every edge whose importance strictly
//! exceeds the threshold.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::actions::{split_dataset, ActionType, LabeledDemoRecord, ACTION_TYPES, NUM_TYPES};
use crate::error::{Error, Result};
use crate::kg::{abstract_edge, instantiate, match_pattern, AbstractEdge, Bindings, KnowledgeGraph};
use crate::seeds;

/// How the dataset-wide frequency of an abstract edge is counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GlobalFreqMode {
    /// Abstract every state under its own record's bindings and count
    /// exact abstract-edge presence. The default.
    #[default]
    OwnBindings,
    /// Count a state as containing the edge when any concrete witness
    /// matches it (slots read as wildcards), without abstracting.
    ConcreteWitness,
}

/// Abstract a whole state under one record's bindings. Set semantics:
/// distinct concrete edges may collapse onto one abstract edge.
pub fn abstract_state(g: &KnowledgeGraph, b: &Bindings) -> BTreeSet<AbstractEdge> {
    g.edges().map(|t| abstract_edge(t, b)).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct EdgeCounts {
    per_type: [u32; NUM_TYPES],
    global: u32,
}

/// Per-edge presence counts over a dataset, with denominators.
#[derive(Clone, Debug, Default)]
pub struct EdgeStats {
    counts: BTreeMap<AbstractEdge, EdgeCounts>,
    n_per_type: [u32; NUM_TYPES],
    n_total: u32,
    mode: GlobalFreqMode,
}

impl EdgeStats {
    pub fn n_total(&self) -> u32 {
        self.n_total
    }

    pub fn mode(&self) -> GlobalFreqMode {
        self.mode
    }

    pub fn n_for(&self, ty: ActionType) -> u32 {
        self.n_per_type[ty.index()]
    }

    pub fn edges(&self) -> impl Iterator<Item = &AbstractEdge> {
        self.counts.keys()
    }

    pub fn count_for(&self, e: &AbstractEdge, ty: ActionType) -> u32 {
        self.counts.get(e).map_or(0, |c| c.per_type[ty.index()])
    }

    pub fn global_count(&self, e: &AbstractEdge) -> u32 {
        self.counts.get(e).map_or(0, |c| c.global)
    }

    /// Fraction of type-`ty` states containing `e`. Rejects types with an
    /// empty sub-dataset, naming the part.
    pub fn freq_for(&self, e: &AbstractEdge, ty: ActionType) -> Result<f64> {
        let n = self.n_for(ty);
        if n == 0 {
            return Err(Error::EmptyPart(ty.name().to_string()));
        }
        Ok(self.count_for(e, ty) as f64 / n as f64)
    }

    /// Fraction of all states containing `e`.
    pub fn freq(&self, e: &AbstractEdge) -> f64 {
        self.global_count(e) as f64 / self.n_total as f64
    }
}

/// Count per-type and dataset-wide abstract-edge presence. Each state is
/// counted once per edge regardless of how many concrete edges abstracted
/// onto it.
pub fn count_frequencies(
    records: &[LabeledDemoRecord],
    mode: GlobalFreqMode,
) -> Result<EdgeStats> {
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut stats = EdgeStats {
        mode,
        n_total: records.len() as u32,
        ..EdgeStats::default()
    };
    for r in records {
        stats.n_per_type[r.type_id.index()] += 1;
        for e in abstract_state(&r.state, &r.bindings) {
            let c = stats.counts.entry(e).or_default();
            c.per_type[r.type_id.index()] += 1;
            if mode == GlobalFreqMode::OwnBindings {
                c.global += 1;
            }
        }
    }
    if mode == GlobalFreqMode::ConcreteWitness {
        let empty = Bindings::new();
        let edges: Vec<AbstractEdge> = stats.counts.keys().cloned().collect();
        for e in edges {
            let pattern = instantiate(&e, &empty);
            let global = records
                .iter()
                .filter(|r| match_pattern(&r.state, &pattern))
                .count() as u32;
            stats.counts.get_mut(&e).unwrap().global = global;
        }
    }
    Ok(stats)
}

/// The tf-idf-style score of an edge for one action type, natural log.
/// `freq = 1` gives exactly zero; `freq_k = 0` gives zero without
/// touching the log.
pub fn importance(freq_k: f64, freq: f64) -> Result<f64> {
    debug_assert!((0.0..=1.0).contains(&freq_k));
    debug_assert!((0.0..=1.0).contains(&freq));
    if freq_k == 0.0 {
        return Ok(0.0);
    }
    if freq == 0.0 {
        return Err(Error::InconsistentFrequency);
    }
    Ok(freq_k * (1.0 / freq).ln())
}

/// One mined rule: an abstract edge and its importance for the type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub edge: AbstractEdge,
    pub importance: f64,
}

/// Mining provenance carried by the rule book.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RuleBookMeta {
    pub dataset_hash: String,
    pub n_records: u32,
    pub per_type: BTreeMap<String, u32>,
    pub global_freq_mode: GlobalFreqMode,
    pub warnings: Vec<String>,
}

/// Per-type mined rules, sorted by descending importance (ties by edge),
/// all strictly above the shared threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleBook {
    pub tau: f64,
    pub types: BTreeMap<String, Vec<Rule>>,
    pub meta: RuleBookMeta,
}

impl RuleBook {
    pub fn rules_for(&self, ty: ActionType) -> &[Rule] {
        self.types.get(ty.name()).map_or(&[], |v| v.as_slice())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule book serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn dataset_hash(records: &[LabeledDemoRecord]) -> String {
    let mut h = 0u64;
    for r in records {
        let line = serde_json::to_string(r).expect("record serialization cannot fail");
        h = seeds::fnv1a(h, line.as_bytes());
    }
    format!("{h:016x}")
}

/// Mine the rule book: for every type with demonstrations, keep the edges
/// with importance strictly above `tau`. Types without demonstrations get
/// empty rule sets and a warning.
pub fn mine_rules(
    records: &[LabeledDemoRecord],
    tau: f64,
    mode: GlobalFreqMode,
) -> Result<RuleBook> {
    assert!(tau >= 0.0, "tau must be nonnegative");
    let stats = count_frequencies(records, mode)?;
    let parts = split_dataset(records);
    let mut types: BTreeMap<String, Vec<Rule>> = BTreeMap::new();
    let mut warnings = Vec::new();
    for ty in ACTION_TYPES {
        let mut rules = Vec::new();
        if stats.n_for(ty) == 0 {
            warnings.push(format!("no demonstrations for type {}", ty.name()));
        } else {
            for e in stats.edges() {
                if stats.count_for(e, ty) == 0 {
                    continue;
                }
                let i = importance(stats.freq_for(e, ty)?, stats.freq(e))?;
                if i > tau {
                    rules.push(Rule {
                        edge: e.clone(),
                        importance: i,
                    });
                }
            }
            rules.sort_by(|a, b| {
                b.importance
                    .partial_cmp(&a.importance)
                    .unwrap()
                    .then_with(|| a.edge.cmp(&b.edge))
            });
        }
        types.insert(ty.name().to_string(), rules);
    }
    let mut per_type = BTreeMap::new();
    for ty in ACTION_TYPES {
        per_type.insert(
            ty.name().to_string(),
            parts.get(&ty).map_or(0, |v| v.len() as u32),
        );
    }
    Ok(RuleBook {
        tau,
        types,
        meta: RuleBookMeta {
            dataset_hash: dataset_hash(records),
            n_records: records.len() as u32,
            per_type,
            global_freq_mode: mode,
            warnings,
        },
    })
}
