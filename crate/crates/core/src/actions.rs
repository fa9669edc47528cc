//! Action templates: parsing action strings into (type, bindings),
//! deriving morphology/context bindings, and splitting demonstration
//! datasets by action type.
//!
//! The grammar is tiny and unambiguous by construction: every legal
//! action string parses under exactly one template, dispatched by its
//! leading verb.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{Bindings, KnowledgeGraph, Provenance, Triple};
use crate::vocab;

/// The fixed action types, in template order. Tie-breaks that prefer the
/// "smaller type index" follow this order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionType {
    Go,
    Take,
    Cut,
    Cook,
    Prepare,
    Eat,
}

pub const ACTION_TYPES: [ActionType; 6] = [
    ActionType::Go,
    ActionType::Take,
    ActionType::Cut,
    ActionType::Cook,
    ActionType::Prepare,
    ActionType::Eat,
];

pub const NUM_TYPES: usize = 6;

impl ActionType {
    pub fn name(self) -> &'static str {
        match self {
            ActionType::Go => "go",
            ActionType::Take => "take",
            ActionType::Cut => "cut",
            ActionType::Cook => "cook",
            ActionType::Prepare => "prepare",
            ActionType::Eat => "eat",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        ACTION_TYPES.get(i).copied()
    }

    pub fn from_name(name: &str) -> Option<Self> {
        ACTION_TYPES.iter().copied().find(|t| t.name() == name)
    }
}

impl fmt::Display for ActionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Slot names used by the templates.
pub mod slots {
    pub const OBJ: &str = "OBJ";
    pub const REC: &str = "REC";
    pub const DIR: &str = "DIR";
    pub const VERB: &str = "VERB";
    pub const APPLIANCE: &str = "APPLIANCE";
    pub const VERB_PASSIVE: &str = "VERB_PASSIVE";
    pub const COOK_RESULT: &str = "COOK_RESULT";
    pub const DIR_REL: &str = "DIR_REL";
    pub const HERE: &str = "HERE";
    pub const DEST: &str = "DEST";
}

/// Provenance class of a slot, by name. Action slots come from parsing;
/// the rest are derived.
pub fn slot_provenance(name: &str) -> Result<Provenance> {
    match name {
        slots::OBJ | slots::REC | slots::DIR | slots::VERB | slots::APPLIANCE => {
            Ok(Provenance::ActionSlot)
        }
        slots::VERB_PASSIVE | slots::COOK_RESULT | slots::DIR_REL => Ok(Provenance::Morphology),
        slots::HERE | slots::DEST => Ok(Provenance::Context),
        other => Err(Error::UnknownSlot(other.to_string())),
    }
}

/// One token of a template pattern: a fixed word or a named slot with a
/// closed vocabulary.
#[derive(Clone, Debug)]
pub enum PatternToken {
    Word(&'static str),
    Slot {
        name: &'static str,
        vocabulary: Vec<&'static str>,
    },
}

/// An action template: a pattern of words and slots for one action type.
#[derive(Clone, Debug)]
pub struct ActionTemplate {
    pub ty: ActionType,
    pub pattern: Vec<PatternToken>,
}

impl ActionTemplate {
    /// Try to match an action's tokens. On failure returns how many
    /// positions matched before the offending token, so the parser can
    /// report the most advanced failure among all templates.
    fn try_match(&self, tokens: &[&str]) -> std::result::Result<Bindings, (usize, Option<String>)> {
        let mut b = Bindings::new();
        for (i, pat) in self.pattern.iter().enumerate() {
            let Some(tok) = tokens.get(i) else {
                return Err((i, None));
            };
            match pat {
                PatternToken::Word(w) => {
                    if w != tok {
                        return Err((i, Some(tok.to_string())));
                    }
                }
                PatternToken::Slot { name, vocabulary } => {
                    if !vocabulary.contains(tok) {
                        return Err((i, Some(tok.to_string())));
                    }
                    b.insert(*name, *tok, Provenance::ActionSlot)
                        .map_err(|_| (i, Some(tok.to_string())))?;
                }
            }
        }
        if tokens.len() != self.pattern.len() {
            return Err((self.pattern.len(), Some(tokens[self.pattern.len()].to_string())));
        }
        Ok(b)
    }
}

fn takeable_objects() -> Vec<&'static str> {
    let mut v: Vec<&'static str> = vocab::INGREDIENTS.to_vec();
    v.push(vocab::KNIFE);
    v.sort_unstable();
    v
}

/// The six templates, in fixed type order.
pub static TEMPLATES: LazyLock<Vec<ActionTemplate>> = LazyLock::new(|| {
    use PatternToken::{Slot, Word};
    vec![
        ActionTemplate {
            ty: ActionType::Go,
            pattern: vec![
                Word("go"),
                Slot {
                    name: slots::DIR,
                    vocabulary: vocab::DIRECTIONS.to_vec(),
                },
            ],
        },
        ActionTemplate {
            ty: ActionType::Take,
            pattern: vec![
                Word("take"),
                Slot {
                    name: slots::OBJ,
                    vocabulary: takeable_objects(),
                },
                Word("from"),
                Slot {
                    name: slots::REC,
                    vocabulary: vocab::CONTAINERS.to_vec(),
                },
            ],
        },
        ActionTemplate {
            ty: ActionType::Cut,
            pattern: vec![
                Slot {
                    name: slots::VERB,
                    vocabulary: vocab::CUT_VERBS.to_vec(),
                },
                Slot {
                    name: slots::OBJ,
                    vocabulary: vocab::INGREDIENTS.to_vec(),
                },
                Word("with"),
                Word("knife"),
            ],
        },
        ActionTemplate {
            ty: ActionType::Cook,
            pattern: vec![
                Word("cook"),
                Slot {
                    name: slots::OBJ,
                    vocabulary: vocab::INGREDIENTS.to_vec(),
                },
                Word("with"),
                Slot {
                    name: slots::APPLIANCE,
                    vocabulary: vocab::APPLIANCES.to_vec(),
                },
            ],
        },
        ActionTemplate {
            ty: ActionType::Prepare,
            pattern: vec![Word("prepare"), Word("meal")],
        },
        ActionTemplate {
            ty: ActionType::Eat,
            pattern: vec![Word("eat"), Word("meal")],
        },
    ]
});

/// Parse an action string into its unique template's type and action-slot
/// bindings.
pub fn parse_action(action: &str) -> Result<(ActionType, Bindings)> {
    let tokens: Vec<&str> = action.split_whitespace().collect();
    let mut matched: Option<(ActionType, Bindings)> = None;
    let mut best_failure: (usize, Option<String>) = (0, None);
    for template in TEMPLATES.iter() {
        match template.try_match(&tokens) {
            Ok(b) => {
                debug_assert!(
                    matched.is_none(),
                    "templates must be unambiguous, {action:?} parsed twice"
                );
                matched = Some((template.ty, b));
            }
            Err((progress, tok)) => {
                if progress >= best_failure.0 && tok.is_some() {
                    best_failure = (progress, tok);
                }
            }
        }
    }
    matched.ok_or_else(|| Error::UnparseableAction {
        action: action.to_string(),
        token: best_failure.1.unwrap_or_else(|| action.to_string()),
    })
}

/// Render an action string from a type and bindings. Inverse of
/// `parse_action` on well-formed inputs.
pub fn render_action(ty: ActionType, b: &Bindings) -> Result<String> {
    let template = &TEMPLATES[ty.index()];
    let mut parts = Vec::with_capacity(template.pattern.len());
    for pat in &template.pattern {
        match pat {
            PatternToken::Word(w) => parts.push(*w),
            PatternToken::Slot { name, .. } => {
                parts.push(b.get(name).ok_or_else(|| Error::UnknownSlot(name.to_string()))?)
            }
        }
    }
    Ok(parts.join(" "))
}

/// Extend action-slot bindings with derived entries:
/// - `VERB_PASSIVE` from `VERB` (slice -> sliced, ...)
/// - `COOK_RESULT` from `APPLIANCE` (stove -> fried, ...)
/// - `DIR_REL` from `DIR` (east -> east_of, ...)
/// - `HERE` from the player's location edge
/// - `DEST` from the unique head of `(_, DIR_REL, HERE)`, when unique
///
/// Never overwrites an existing binding.
pub fn derive_bindings(b: &Bindings, s: &KnowledgeGraph) -> Bindings {
    let mut out = b.clone();
    if let Some(verb) = out.get(slots::VERB).map(str::to_string) {
        if let Some(form) = vocab::cut_form_of(&verb) {
            let _ = out.insert(slots::VERB_PASSIVE, form, Provenance::Morphology);
        }
    }
    if let Some(app) = out.get(slots::APPLIANCE).map(str::to_string) {
        if let Some(result) = vocab::cook_result_of(&app) {
            let _ = out.insert(slots::COOK_RESULT, result, Provenance::Morphology);
        }
    }
    if let Some(dir) = out.get(slots::DIR).map(str::to_string) {
        if let Some(rel) = vocab::direction_relation(&dir) {
            let _ = out.insert(slots::DIR_REL, rel, Provenance::Morphology);
        }
    }
    // The player has exactly one location edge in well-formed states;
    // under input noise there may be several, so take the smallest tail.
    let here = s
        .edges()
        .filter(|t| t.head == vocab::PLAYER && t.relation == "at")
        .map(|t| t.tail.clone())
        .next();
    if let Some(here) = here {
        let _ = out.insert(slots::HERE, here.clone(), Provenance::Context);
        if let Some(rel) = out.get(slots::DIR_REL).map(str::to_string) {
            let heads: Vec<&str> = s
                .edges()
                .filter(|t| t.relation == rel && t.tail == here)
                .map(|t| t.head.as_str())
                .collect();
            if let [only] = heads.as_slice() {
                let _ = out.insert(slots::DEST, *only, Provenance::Context);
            }
        }
    }
    out
}

/// Which policy produced a demonstration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TeacherTag {
    Oracle,
    Q,
    Random,
}

impl fmt::Display for TeacherTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TeacherTag::Oracle => f.write_str("oracle"),
            TeacherTag::Q => f.write_str("q"),
            TeacherTag::Random => f.write_str("random"),
        }
    }
}

/// One labeled demonstration row: the state graph, the teacher's action,
/// the candidate set it was chosen from, the parsed type and bindings.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDemoRecord {
    pub state: KnowledgeGraph,
    pub action: String,
    pub candidates: Vec<String>,
    pub type_id: ActionType,
    pub bindings: Bindings,
    pub teacher: TeacherTag,
}

impl LabeledDemoRecord {
    /// Build a record by parsing the action and deriving bindings against
    /// the state.
    pub fn new(
        state: KnowledgeGraph,
        action: String,
        candidates: Vec<String>,
        teacher: TeacherTag,
    ) -> Result<Self> {
        let (type_id, base) = parse_action(&action)?;
        let bindings = derive_bindings(&base, &state);
        Ok(Self {
            state,
            action,
            candidates,
            type_id,
            bindings,
            teacher,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RecordJson {
    state: Vec<Triple>,
    action: String,
    candidates: Vec<String>,
    #[serde(rename = "type")]
    ty: String,
    bindings: BTreeMap<String, String>,
    teacher: TeacherTag,
}

impl Serialize for LabeledDemoRecord {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RecordJson {
            state: self.state.edges().cloned().collect(),
            action: self.action.clone(),
            candidates: self.candidates.clone(),
            ty: self.type_id.name().to_string(),
            bindings: self.bindings.to_token_map(),
            teacher: self.teacher,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LabeledDemoRecord {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let raw = RecordJson::deserialize(deserializer)?;
        let type_id = ActionType::from_name(&raw.ty)
            .ok_or_else(|| D::Error::custom(format!("unknown action type {:?}", raw.ty)))?;
        let mut bindings = Bindings::new();
        for (slot, token) in raw.bindings {
            let prov = slot_provenance(&slot).map_err(D::Error::custom)?;
            bindings
                .insert(slot, token, prov)
                .map_err(D::Error::custom)?;
        }
        Ok(Self {
            state: KnowledgeGraph::from_edges(raw.state),
            action: raw.action,
            candidates: raw.candidates,
            type_id,
            bindings,
            teacher: raw.teacher,
        })
    }
}

/// Serialize records as JSONL, one record per line.
pub fn write_jsonl<W: Write>(mut w: W, records: &[LabeledDemoRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<LabeledDemoRecord>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

/// Partition a dataset by action type, preserving record order within
/// each part.
pub fn split_dataset(
    records: &[LabeledDemoRecord],
) -> BTreeMap<ActionType, Vec<&LabeledDemoRecord>> {
    let mut parts: BTreeMap<ActionType, Vec<&LabeledDemoRecord>> = BTreeMap::new();
    for r in records {
        parts.entry(r.type_id).or_default().push(r);
    }
    parts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::Triple;
    use proptest::prelude::*;

    #[test]
    fn parse_take() {
        let (ty, b) = parse_action("take apple from fridge").unwrap();
        assert_eq!(ty, ActionType::Take);
        assert_eq!(b.get("OBJ"), Some("apple"));
        assert_eq!(b.get("REC"), Some("fridge"));
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn parse_cut() {
        let (ty, b) = parse_action("slice potato with knife").unwrap();
        assert_eq!(ty, ActionType::Cut);
        assert_eq!(b.get("VERB"), Some("slice"));
        assert_eq!(b.get("OBJ"), Some("potato"));
    }

    #[test]
    fn parse_slotless_template() {
        let (ty, b) = parse_action("prepare meal").unwrap();
        assert_eq!(ty, ActionType::Prepare);
        assert!(b.is_empty());
    }

    #[test]
    fn parse_rejects_with_offending_token() {
        let err = parse_action("take sword from fridge").unwrap_err();
        match err {
            Error::UnparseableAction { token, .. } => assert_eq!(token, "sword"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn derive_adds_cut_morphology() {
        let (_, b) = parse_action("dice cheese with knife").unwrap();
        let out = derive_bindings(&b, &KnowledgeGraph::new());
        assert_eq!(out.get("VERB_PASSIVE"), Some("diced"));
        assert_eq!(out.get("HERE"), None);
    }

    #[test]
    fn derive_adds_navigation_context() {
        let s = KnowledgeGraph::from_edges([
            Triple::new("player", "at", "pantry"),
            Triple::new("kitchen", "east_of", "pantry"),
        ]);
        let (_, b) = parse_action("go east").unwrap();
        let out = derive_bindings(&b, &s);
        assert_eq!(out.get("DIR_REL"), Some("east_of"));
        assert_eq!(out.get("HERE"), Some("pantry"));
        assert_eq!(out.get("DEST"), Some("kitchen"));
    }

    #[test]
    fn derive_leaves_dest_unbound_when_ambiguous() {
        let s = KnowledgeGraph::from_edges([
            Triple::new("player", "at", "pantry"),
            Triple::new("kitchen", "east_of", "pantry"),
            Triple::new("shed", "east_of", "pantry"),
        ]);
        let (_, b) = parse_action("go east").unwrap();
        let out = derive_bindings(&b, &s);
        assert_eq!(out.get("DEST"), None);
    }

    #[test]
    fn derive_adds_here_only_for_prepare() {
        let s = KnowledgeGraph::from_edges([Triple::new("player", "at", "kitchen")]);
        let (_, b) = parse_action("prepare meal").unwrap();
        let out = derive_bindings(&b, &s);
        assert_eq!(out.get("HERE"), Some("kitchen"));
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn derive_never_overwrites_action_slots() {
        let (_, b) = parse_action("cook potato with stove").unwrap();
        let out = derive_bindings(&b, &KnowledgeGraph::new());
        assert_eq!(out.get("OBJ"), Some("potato"));
        assert_eq!(out.get("APPLIANCE"), Some("stove"));
        assert_eq!(out.get("COOK_RESULT"), Some("fried"));
        for (slot, tok, _) in b.iter() {
            assert_eq!(out.get(slot), Some(tok));
        }
    }

    fn record(ty_action: &str, teacher: TeacherTag) -> LabeledDemoRecord {
        LabeledDemoRecord::new(
            KnowledgeGraph::from_edges([Triple::new("player", "at", "kitchen")]),
            ty_action.to_string(),
            vec![ty_action.to_string()],
            teacher,
        )
        .unwrap()
    }

    #[test]
    fn split_is_a_partition() {
        let records = vec![
            record("slice potato with knife", TeacherTag::Oracle),
            record("dice apple with knife", TeacherTag::Oracle),
            record("take apple from fridge", TeacherTag::Oracle),
            record("take potato from counter", TeacherTag::Oracle),
        ];
        let parts = split_dataset(&records);
        assert_eq!(parts[&ActionType::Cut].len(), 2);
        assert_eq!(parts[&ActionType::Take].len(), 2);
        assert_eq!(parts.values().map(|v| v.len()).sum::<usize>(), records.len());
        assert!(split_dataset(&[]).is_empty());
        // Order preserved within parts.
        assert_eq!(parts[&ActionType::Cut][0].action, "slice potato with knife");
    }

    #[test]
    fn jsonl_round_trip_is_exact() {
        let records = vec![
            record("slice potato with knife", TeacherTag::Oracle),
            record("take apple from fridge", TeacherTag::Q),
            record("prepare meal", TeacherTag::Random),
        ];
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().next().unwrap().contains("\"type\":\"cut\""));
        let back = read_jsonl(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(back, records);
        let mut buf2 = Vec::new();
        write_jsonl(&mut buf2, &back).unwrap();
        assert_eq!(buf, buf2);
    }

    fn any_action() -> impl Strategy<Value = String> {
        prop_oneof![
            proptest::sample::select(vocab::DIRECTIONS).prop_map(|d| format!("go {d}")),
            (
                proptest::sample::select(vocab::INGREDIENTS),
                proptest::sample::select(vocab::CONTAINERS)
            )
                .prop_map(|(o, c)| format!("take {o} from {c}")),
            (
                proptest::sample::select(vocab::CUT_VERBS),
                proptest::sample::select(vocab::INGREDIENTS)
            )
                .prop_map(|(v, o)| format!("{v} {o} with knife")),
            (
                proptest::sample::select(vocab::INGREDIENTS),
                proptest::sample::select(vocab::APPLIANCES)
            )
                .prop_map(|(o, a)| format!("cook {o} with {a}")),
            Just("prepare meal".to_string()),
            Just("eat meal".to_string()),
        ]
    }

    proptest! {
        #[test]
        fn parse_then_render_is_identity(action in any_action()) {
            let (ty, b) = parse_action(&action).unwrap();
            prop_assert_eq!(render_action(ty, &b).unwrap(), action);
        }
    }
}
