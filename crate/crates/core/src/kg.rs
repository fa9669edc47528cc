//! Knowledge-graph value types and the abstraction/instantiation machinery
//! that converts between concrete triples and slot-parameterized edges.
//!
//! All types here are immutable values: operations are pure functions and
//! everything is safe to share across threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A directed labeled edge over string tokens. Serialized as a 3-element
/// string array `["head", "relation", "tail"]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(String, String, String)", into = "(String, String, String)")]
pub struct Triple {
    pub head: String,
    pub relation: String,
    pub tail: String,
}

impl Triple {
    pub fn new(
        head: impl Into<String>,
        relation: impl Into<String>,
        tail: impl Into<String>,
    ) -> Self {
        Self {
            head: head.into(),
            relation: relation.into(),
            tail: tail.into(),
        }
    }
}

impl From<(String, String, String)> for Triple {
    fn from((head, relation, tail): (String, String, String)) -> Self {
        Self {
            head,
            relation,
            tail,
        }
    }
}

impl From<Triple> for (String, String, String) {
    fn from(t: Triple) -> Self {
        (t.head, t.relation, t.tail)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.head, self.relation, self.tail)
    }
}

/// A state: a duplicate-free set of triples. Iteration and serialization
/// order is lexicographic on (head, relation, tail), so serializing the
/// same edge set is byte-identical across runs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KnowledgeGraph {
    edges: BTreeSet<Triple>,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges(edges: impl IntoIterator<Item = Triple>) -> Self {
        Self {
            edges: edges.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, t: Triple) -> bool {
        self.edges.insert(t)
    }

    pub fn remove(&mut self, t: &Triple) -> bool {
        self.edges.remove(t)
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.edges.contains(t)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Triple> {
        self.edges.iter()
    }

    /// Tokens appearing in head or tail position.
    pub fn node_vocabulary(&self) -> BTreeSet<&str> {
        self.edges
            .iter()
            .flat_map(|t| [t.head.as_str(), t.tail.as_str()])
            .collect()
    }

    pub fn relation_vocabulary(&self) -> BTreeSet<&str> {
        self.edges.iter().map(|t| t.relation.as_str()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl FromIterator<Triple> for KnowledgeGraph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Self::from_edges(iter)
    }
}

/// Where a binding came from. Action slots are filled by parsing the
/// action string; morphology and context entries are derived from them
/// and from the state graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Provenance {
    ActionSlot,
    Morphology,
    Context,
}

/// Map from slot name to bound token, with per-entry provenance.
///
/// Action-slot entries are injective: no two action slots may bind the
/// same token within one template instance.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bindings {
    entries: BTreeMap<String, (String, Provenance)>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        slot: impl Into<String>,
        token: impl Into<String>,
        provenance: Provenance,
    ) -> Result<()> {
        let slot = slot.into();
        let token = token.into();
        if self.entries.contains_key(&slot) {
            return Err(Error::SlotAlreadyBound(slot));
        }
        if provenance == Provenance::ActionSlot
            && self
                .entries
                .values()
                .any(|(t, p)| *p == Provenance::ActionSlot && *t == token)
        {
            return Err(Error::DuplicateSlotToken(token));
        }
        self.entries.insert(slot, (token, provenance));
        Ok(())
    }

    pub fn get(&self, slot: &str) -> Option<&str> {
        self.entries.get(slot).map(|(t, _)| t.as_str())
    }

    pub fn contains_slot(&self, slot: &str) -> bool {
        self.entries.contains_key(slot)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, Provenance)> {
        self.entries.iter().map(|(s, (t, p))| (s.as_str(), t.as_str(), *p))
    }

    /// The slot that abstracts `token`, if any. When several slots bind
    /// the same token, action-slot provenance wins, then the
    /// lexicographically smallest slot name.
    pub fn slot_for_token(&self, token: &str) -> Option<&str> {
        self.entries
            .iter()
            .filter(|(_, (t, _))| t == token)
            .min_by_key(|(name, (_, p))| (*p != Provenance::ActionSlot, name.as_str()))
            .map(|(name, _)| name.as_str())
    }

    /// Token map without provenance, for serialization.
    pub fn to_token_map(&self) -> BTreeMap<String, String> {
        self.entries
            .iter()
            .map(|(s, (t, _))| (s.clone(), t.clone()))
            .collect()
    }
}

/// One position of an abstract edge: a literal token, a reference to a
/// named slot, or an existential wildcard. Serialized as a tagged string:
/// literal `"tok"`, slot `"$SLOT"`, wildcard `"?1"`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum Position {
    Literal(String),
    Slot(String),
    Wildcard(u32),
}

impl Position {
    pub fn literal(tok: impl Into<String>) -> Self {
        Position::Literal(tok.into())
    }

    pub fn slot(name: impl Into<String>) -> Self {
        Position::Slot(name.into())
    }
}

impl From<String> for Position {
    fn from(s: String) -> Self {
        if let Some(name) = s.strip_prefix('$') {
            if !name.is_empty() {
                return Position::Slot(name.to_string());
            }
        }
        if let Some(idx) = s.strip_prefix('?') {
            if let Ok(n) = idx.parse::<u32>() {
                return Position::Wildcard(n);
            }
        }
        Position::Literal(s)
    }
}

impl From<Position> for String {
    fn from(p: Position) -> Self {
        match p {
            Position::Literal(t) => t,
            Position::Slot(s) => format!("${s}"),
            Position::Wildcard(n) => format!("?{n}"),
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Literal(t) => write!(f, "{t}"),
            Position::Slot(s) => write!(f, "${s}"),
            Position::Wildcard(n) => write!(f, "?{n}"),
        }
    }
}

/// A triple whose positions may be slot references or existential
/// wildcards. Wildcard indices are scoped to a single edge: the same
/// index in two positions of one edge must match the same token.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(Position, Position, Position)", into = "(Position, Position, Position)")]
pub struct AbstractEdge {
    pub head: Position,
    pub relation: Position,
    pub tail: Position,
}

impl AbstractEdge {
    pub fn new(head: Position, relation: Position, tail: Position) -> Self {
        Self {
            head,
            relation,
            tail,
        }
    }

    pub fn positions(&self) -> [&Position; 3] {
        [&self.head, &self.relation, &self.tail]
    }

    /// Re-abstract the literal positions of an already-abstract edge
    /// under the same bindings. Applying this after `abstract_edge` with
    /// identical bindings is a no-op.
    pub fn abstract_with(&self, b: &Bindings) -> AbstractEdge {
        let abs = |p: &Position| match p {
            Position::Literal(tok) => match b.slot_for_token(tok) {
                Some(slot) => Position::Slot(slot.to_string()),
                None => p.clone(),
            },
            other => other.clone(),
        };
        AbstractEdge {
            head: abs(&self.head),
            relation: abs(&self.relation),
            tail: abs(&self.tail),
        }
    }
}

impl From<(Position, Position, Position)> for AbstractEdge {
    fn from((head, relation, tail): (Position, Position, Position)) -> Self {
        Self {
            head,
            relation,
            tail,
        }
    }
}

impl From<AbstractEdge> for (Position, Position, Position) {
    fn from(e: AbstractEdge) -> Self {
        (e.head, e.relation, e.tail)
    }
}

impl fmt::Display for AbstractEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.head, self.relation, self.tail)
    }
}

/// One position of a match pattern: a literal or an existential wildcard.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatTerm {
    Literal(String),
    Wildcard(u32),
}

impl fmt::Display for PatTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatTerm::Literal(t) => write!(f, "{t}"),
            PatTerm::Wildcard(n) => write!(f, "?{n}"),
        }
    }
}

/// A single-edge pattern of literals and wildcards, matched against a
/// graph by one-hop existence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MatchPattern {
    pub head: PatTerm,
    pub relation: PatTerm,
    pub tail: PatTerm,
}

impl MatchPattern {
    pub fn concrete(t: &Triple) -> Self {
        Self {
            head: PatTerm::Literal(t.head.clone()),
            relation: PatTerm::Literal(t.relation.clone()),
            tail: PatTerm::Literal(t.tail.clone()),
        }
    }

    pub fn is_concrete(&self) -> bool {
        self.terms()
            .iter()
            .all(|t| matches!(t, PatTerm::Literal(_)))
    }

    fn terms(&self) -> [&PatTerm; 3] {
        [&self.head, &self.relation, &self.tail]
    }
}

impl fmt::Display for MatchPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.head, self.relation, self.tail)
    }
}

/// Replace every position of `t` whose token equals a bound value by that
/// slot reference; unbound tokens stay literal. Whole tokens only.
pub fn abstract_edge(t: &Triple, b: &Bindings) -> AbstractEdge {
    let abs = |tok: &str| match b.slot_for_token(tok) {
        Some(slot) => Position::Slot(slot.to_string()),
        None => Position::Literal(tok.to_string()),
    };
    AbstractEdge {
        head: abs(&t.head),
        relation: abs(&t.relation),
        tail: abs(&t.tail),
    }
}

/// Instantiate an abstract edge against bindings: bound slots become
/// literals, unbound slots become fresh existential wildcards (the same
/// unbound slot gets the same wildcard), existing wildcards are kept.
pub fn instantiate(ae: &AbstractEdge, b: &Bindings) -> MatchPattern {
    let mut next = ae
        .positions()
        .iter()
        .filter_map(|p| match p {
            Position::Wildcard(n) => Some(*n + 1),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let mut fresh: BTreeMap<String, u32> = BTreeMap::new();
    let mut inst = |p: &Position| match p {
        Position::Literal(tok) => PatTerm::Literal(tok.clone()),
        Position::Wildcard(n) => PatTerm::Wildcard(*n),
        Position::Slot(name) => match b.get(name) {
            Some(tok) => PatTerm::Literal(tok.to_string()),
            None => {
                let idx = *fresh.entry(name.clone()).or_insert_with(|| {
                    let idx = next;
                    next += 1;
                    idx
                });
                PatTerm::Wildcard(idx)
            }
        },
    };
    MatchPattern {
        head: inst(&ae.head),
        relation: inst(&ae.relation),
        tail: inst(&ae.tail),
    }
}

/// True iff some assignment of graph tokens to the pattern's wildcards
/// (consistent per wildcard index) yields a triple present in `g`. Fully
/// concrete patterns reduce to set membership.
pub fn match_pattern(g: &KnowledgeGraph, p: &MatchPattern) -> bool {
    if let (PatTerm::Literal(h), PatTerm::Literal(r), PatTerm::Literal(t)) =
        (&p.head, &p.relation, &p.tail)
    {
        return g.contains(&Triple::new(h.clone(), r.clone(), t.clone()));
    }
    g.edges().any(|e| unifies(e, p))
}

fn unifies(e: &Triple, p: &MatchPattern) -> bool {
    let mut assigned: Vec<(u32, &str)> = Vec::with_capacity(3);
    for (term, tok) in p
        .terms()
        .into_iter()
        .zip([e.head.as_str(), e.relation.as_str(), e.tail.as_str()])
    {
        match term {
            PatTerm::Literal(lit) => {
                if lit.as_str() != tok {
                    return false;
                }
            }
            PatTerm::Wildcard(idx) => match assigned.iter().find(|(i, _)| i == idx) {
                Some((_, bound)) => {
                    if *bound != tok {
                        return false;
                    }
                }
                None => assigned.push((*idx, tok)),
            },
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bind(pairs: &[(&str, &str, Provenance)]) -> Bindings {
        let mut b = Bindings::new();
        for (s, t, p) in pairs {
            b.insert(*s, *t, *p).unwrap();
        }
        b
    }

    #[test]
    fn abstract_replaces_bound_tokens() {
        let b = bind(&[("OBJ", "potato", Provenance::ActionSlot)]);
        let got = abstract_edge(&Triple::new("potato", "in", "player"), &b);
        assert_eq!(
            got,
            AbstractEdge::new(
                Position::slot("OBJ"),
                Position::literal("in"),
                Position::literal("player")
            )
        );
    }

    #[test]
    fn abstract_leaves_unbound_edges_unchanged() {
        let b = bind(&[("OBJ", "potato", Provenance::ActionSlot)]);
        let got = abstract_edge(&Triple::new("stove", "in", "kitchen"), &b);
        assert_eq!(
            got,
            AbstractEdge::new(
                Position::literal("stove"),
                Position::literal("in"),
                Position::literal("kitchen")
            )
        );
    }

    #[test]
    fn abstract_applies_morphology_bindings() {
        let b = bind(&[
            ("OBJ", "potato", Provenance::ActionSlot),
            ("VERB", "slice", Provenance::ActionSlot),
            ("VERB_PASSIVE", "sliced", Provenance::Morphology),
        ]);
        let got = abstract_edge(&Triple::new("potato", "needs", "sliced"), &b);
        assert_eq!(
            got,
            AbstractEdge::new(
                Position::slot("OBJ"),
                Position::literal("needs"),
                Position::slot("VERB_PASSIVE")
            )
        );
    }

    #[test]
    fn token_collision_prefers_action_slot_then_lexicographic() {
        let b = bind(&[
            ("ZZZ", "potato", Provenance::ActionSlot),
            ("AAA", "potato", Provenance::Context),
        ]);
        assert_eq!(b.slot_for_token("potato"), Some("ZZZ"));

        let b = bind(&[
            ("DEST", "kitchen", Provenance::Context),
            ("HERE", "kitchen", Provenance::Context),
        ]);
        assert_eq!(b.slot_for_token("kitchen"), Some("DEST"));
    }

    #[test]
    fn action_slot_bindings_are_injective() {
        let mut b = bind(&[("OBJ", "potato", Provenance::ActionSlot)]);
        let err = b.insert("REC", "potato", Provenance::ActionSlot).unwrap_err();
        assert!(matches!(err, Error::DuplicateSlotToken(_)));
        // Derived entries may alias freely.
        b.insert("HERE", "potato", Provenance::Context).unwrap();
    }

    #[test]
    fn instantiate_bound_slot_becomes_literal() {
        let b = bind(&[("OBJ", "potato", Provenance::ActionSlot)]);
        let ae = AbstractEdge::new(
            Position::slot("OBJ"),
            Position::literal("in"),
            Position::literal("player"),
        );
        let p = instantiate(&ae, &b);
        assert_eq!(p, MatchPattern::concrete(&Triple::new("potato", "in", "player")));
        assert!(p.is_concrete());
    }

    #[test]
    fn instantiate_literal_edge_is_itself() {
        let ae = AbstractEdge::new(
            Position::literal("stove"),
            Position::literal("in"),
            Position::literal("kitchen"),
        );
        let p = instantiate(&ae, &Bindings::new());
        assert_eq!(p, MatchPattern::concrete(&Triple::new("stove", "in", "kitchen")));
    }

    #[test]
    fn instantiate_unbound_slot_becomes_wildcard() {
        let b = bind(&[("HERE", "pantry", Provenance::Context)]);
        let ae = AbstractEdge::new(
            Position::slot("DEST"),
            Position::literal("east_of"),
            Position::slot("HERE"),
        );
        let p = instantiate(&ae, &b);
        assert_eq!(
            p,
            MatchPattern {
                head: PatTerm::Wildcard(0),
                relation: PatTerm::Literal("east_of".into()),
                tail: PatTerm::Literal("pantry".into()),
            }
        );
        let g = KnowledgeGraph::from_edges([Triple::new("kitchen", "east_of", "pantry")]);
        assert!(match_pattern(&g, &p));
    }

    #[test]
    fn match_pattern_wildcard_witness() {
        let g = KnowledgeGraph::from_edges([Triple::new("kitchen", "east_of", "pantry")]);
        let p = MatchPattern {
            head: PatTerm::Wildcard(0),
            relation: PatTerm::Literal("east_of".into()),
            tail: PatTerm::Literal("pantry".into()),
        };
        assert!(match_pattern(&g, &p));
        assert!(!match_pattern(&KnowledgeGraph::new(), &p));
    }

    #[test]
    fn match_pattern_repeated_wildcard_requires_same_token() {
        let g = KnowledgeGraph::from_edges([Triple::new("a", "r", "b")]);
        let p = MatchPattern {
            head: PatTerm::Wildcard(1),
            relation: PatTerm::Literal("r".into()),
            tail: PatTerm::Wildcard(1),
        };
        assert!(!match_pattern(&g, &p));
        let g2 = KnowledgeGraph::from_edges([Triple::new("a", "r", "a")]);
        assert!(match_pattern(&g2, &p));
    }

    #[test]
    fn serialization_is_stable_and_sorted() {
        let g = KnowledgeGraph::from_edges([
            Triple::new("stove", "in", "kitchen"),
            Triple::new("potato", "in", "player"),
        ]);
        let s1 = g.to_json();
        let s2 = g.to_json();
        assert_eq!(s1, s2);
        assert_eq!(
            s1,
            r#"[["potato","in","player"],["stove","in","kitchen"]]"#
        );
        assert_eq!(KnowledgeGraph::from_json(&s1).unwrap(), g);
    }

    #[test]
    fn position_tagged_string_round_trip() {
        for (s, want) in [
            ("potato", Position::literal("potato")),
            ("$OBJ", Position::slot("OBJ")),
            ("?3", Position::Wildcard(3)),
            ("?x", Position::literal("?x")),
        ] {
            let got: Position = s.to_string().into();
            assert_eq!(got, want);
            if let Position::Literal(_) = want {
                continue;
            }
            let back: String = got.into();
            assert_eq!(back, s);
        }
    }

    fn token_strategy() -> impl Strategy<Value = String> {
        "[a-z]{1,6}"
    }

    fn triple_strategy() -> impl Strategy<Value = Triple> {
        (token_strategy(), token_strategy(), token_strategy())
            .prop_map(|(h, r, t)| Triple::new(h, r, t))
    }

    fn bindings_strategy() -> impl Strategy<Value = Bindings> {
        proptest::collection::btree_map("[A-Z]{1,4}", token_strategy(), 0..4).prop_map(|m| {
            let mut b = Bindings::new();
            for (i, (slot, tok)) in m.into_iter().enumerate() {
                let prov = match i % 3 {
                    0 => Provenance::ActionSlot,
                    1 => Provenance::Morphology,
                    _ => Provenance::Context,
                };
                // Duplicate action-slot tokens are rejected; skip those.
                let _ = b.insert(slot, tok, prov);
            }
            b
        })
    }

    proptest! {
        #[test]
        fn round_trip_matches_original(t in triple_strategy(), b in bindings_strategy()) {
            let ae = abstract_edge(&t, &b);
            let p = instantiate(&ae, &b);
            let g = KnowledgeGraph::from_edges([t.clone()]);
            prop_assert!(match_pattern(&g, &p));
            prop_assert!(p.is_concrete());
            prop_assert_eq!(p, MatchPattern::concrete(&t));
        }

        #[test]
        fn abstraction_is_idempotent(t in triple_strategy(), b in bindings_strategy()) {
            let ae = abstract_edge(&t, &b);
            prop_assert_eq!(ae.abstract_with(&b), ae);
        }

        #[test]
        fn concrete_pattern_is_membership(t in triple_strategy(), extra in proptest::collection::vec(triple_strategy(), 0..5)) {
            let g = KnowledgeGraph::from_edges(extra);
            let p = MatchPattern::concrete(&t);
            prop_assert_eq!(match_pattern(&g, &p), g.contains(&t));
        }
    }
}
