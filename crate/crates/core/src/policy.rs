//! The two-step hybrid policy: the pruner predicts an action type, the
//! rule selector scores that type's candidates by how many of their
//! instantiated supporting edges are present in the state graph, and the
//! highest scorer wins (ties to the lexicographically smallest action).
//!
//! Scores are unweighted overlap counts; importances are reported in
//! explanations but never affect selection.

use serde::{Deserialize, Serialize};

use crate::actions::{derive_bindings, parse_action, ActionType, NUM_TYPES};
use crate::error::Result;
use crate::kg::{instantiate, match_pattern, AbstractEdge, KnowledgeGraph};
use crate::miner::RuleBook;
use crate::pruner::PrunerModel;

/// One rule's contribution to a candidate's score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeCheck {
    pub edge: AbstractEdge,
    pub pattern: String,
    pub matched: bool,
    pub importance: f64,
}

/// Score breakdown for one candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub action: String,
    #[serde(rename = "type")]
    pub ty: ActionType,
    pub score: u32,
    pub checks: Vec<EdgeCheck>,
}

/// A human-readable account of one decision: the predicted type and its
/// distribution, the type actually used after fallback, and the score
/// breakdown of the chosen action and its same-type rivals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub chosen: String,
    pub predicted_type: ActionType,
    pub distribution: [f64; NUM_TYPES],
    pub used_type: ActionType,
    pub candidates: Vec<CandidateScore>,
}

impl Explanation {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("explanation serialization cannot fail")
    }
}

/// Score one action: parse it, derive bindings against the state,
/// instantiate every rule edge of its type, and count the patterns
/// present in the graph.
pub fn score_action(g: &KnowledgeGraph, action: &str, rules: &RuleBook) -> Result<CandidateScore> {
    let (ty, base) = parse_action(action)?;
    let bindings = derive_bindings(&base, g);
    let mut checks = Vec::new();
    let mut score = 0;
    for rule in rules.rules_for(ty) {
        let pattern = instantiate(&rule.edge, &bindings);
        let matched = match_pattern(g, &pattern);
        if matched {
            score += 1;
        }
        checks.push(EdgeCheck {
            edge: rule.edge.clone(),
            pattern: pattern.to_string(),
            matched,
            importance: rule.importance,
        });
    }
    Ok(CandidateScore {
        action: action.to_string(),
        ty,
        score,
        checks,
    })
}

/// Selection outcome: the chosen action, the type it came from, and the
/// scored same-type candidates.
#[derive(Clone, Debug)]
pub struct Selection {
    pub action: String,
    pub used_type: ActionType,
    pub scored: Vec<CandidateScore>,
}

/// Pick the best candidate of the first type in `ranking` that has any
/// candidates (the predicted type first, then fallback order). Highest
/// score wins; ties go to the lexicographically smallest action string.
pub fn select_action(
    g: &KnowledgeGraph,
    ranking: &[ActionType],
    candidates: &[String],
    rules: &RuleBook,
) -> Result<Selection> {
    let parsed: Vec<(ActionType, &String)> = candidates
        .iter()
        .map(|c| parse_action(c).map(|(ty, _)| (ty, c)))
        .collect::<Result<_>>()?;
    for &ty in ranking {
        let of_type: Vec<&String> = parsed
            .iter()
            .filter(|(t, _)| *t == ty)
            .map(|(_, c)| *c)
            .collect();
        if of_type.is_empty() {
            continue;
        }
        let mut scored = Vec::with_capacity(of_type.len());
        for c in of_type {
            scored.push(score_action(g, c, rules)?);
        }
        let best = scored
            .iter()
            .map(|s| (std::cmp::Reverse(s.score), s.action.clone()))
            .min()
            .map(|(_, a)| a)
            .expect("nonempty");
        return Ok(Selection {
            action: best,
            used_type: ty,
            scored,
        });
    }
    Err(crate::error::Error::CorruptState(
        "no candidate of any ranked type".into(),
    ))
}

/// The full two-step policy. Stateless across steps: a pure function of
/// the current graph and candidate set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HybridPolicy {
    pub pruner: PrunerModel,
    pub rules: RuleBook,
}

impl HybridPolicy {
    pub fn new(pruner: PrunerModel, rules: RuleBook) -> Self {
        Self { pruner, rules }
    }

    /// Predict the type, select within it (falling back through the
    /// pruner's ranking when the predicted type has no candidates), and
    /// explain the decision.
    pub fn act(&self, g: &KnowledgeGraph, candidates: &[String]) -> Result<(String, Explanation)> {
        let (predicted, distribution) = self.pruner.predict(g);
        let ranking = self.pruner.ranked_types(g);
        let selection = select_action(g, &ranking, candidates, &self.rules)?;
        let explanation = Explanation {
            chosen: selection.action.clone(),
            predicted_type: predicted,
            distribution,
            used_type: selection.used_type,
            candidates: selection.scored,
        };
        Ok((selection.action, explanation))
    }
}
