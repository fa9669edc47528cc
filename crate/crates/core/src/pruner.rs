//! The action-type classifier: renaming-invariant relational features
//! plus multinomial softmax regression trained by mini-batch gradient
//! descent on cross-entropy.
//!
//! Features never mention ingredient or room names, only closed-domain
//! tokens, existential wildcards, and one-variable joins, so a model
//! transfers to freshly named environments unchanged.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::actions::{ActionType, LabeledDemoRecord, NUM_TYPES};
use crate::error::{Error, Result};
use crate::kg::KnowledgeGraph;
use crate::seeds;
use crate::vocab;

/// One term of a feature pattern atom.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum PatternTerm {
    /// A closed-vocabulary token.
    Token(String),
    /// The shared join variable.
    Var,
    /// Matches anything, no consistency constraint.
    Any,
}

impl From<String> for PatternTerm {
    fn from(s: String) -> Self {
        match s.as_str() {
            "?x" => PatternTerm::Var,
            "*" => PatternTerm::Any,
            _ => PatternTerm::Token(s),
        }
    }
}

impl From<PatternTerm> for String {
    fn from(t: PatternTerm) -> Self {
        match t {
            PatternTerm::Token(s) => s,
            PatternTerm::Var => "?x".to_string(),
            PatternTerm::Any => "*".to_string(),
        }
    }
}

/// A single pattern atom (head, relation, tail).
pub type PatternAtom = (PatternTerm, PatternTerm, PatternTerm);

/// One feature of the library.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Feature {
    /// Count of edges with this relation.
    RelationCount { relation: String },
    /// 1 when some edge matches the atom.
    Exists { atom: PatternAtom },
    /// 1 when both atoms match with a common witness for the variable.
    Join { first: PatternAtom, second: PatternAtom },
    /// Constant 1.
    Bias,
}

impl Feature {
    pub fn name(&self) -> String {
        let term = |t: &PatternTerm| String::from(t.clone());
        let atom = |a: &PatternAtom| format!("({},{},{})", term(&a.0), term(&a.1), term(&a.2));
        match self {
            Feature::RelationCount { relation } => format!("count:{relation}"),
            Feature::Exists { atom: a } => format!("exists:{}", atom(a)),
            Feature::Join { first, second } => format!("join:{}&{}", atom(first), atom(second)),
            Feature::Bias => "bias".to_string(),
        }
    }
}

fn tok(s: &str) -> PatternTerm {
    PatternTerm::Token(s.to_string())
}

fn atom(h: PatternTerm, r: &str, t: PatternTerm) -> PatternAtom {
    (h, tok(r), t)
}

/// The fixed feature library: per-relation edge counts, one-edge
/// existential indicators over closed tokens, and two-edge conjunctions
/// sharing one variable.
pub fn standard_library() -> Vec<Feature> {
    use PatternTerm::{Any, Var};
    let mut lib = Vec::new();
    for rel in vocab::RELATIONS {
        lib.push(Feature::RelationCount {
            relation: rel.to_string(),
        });
    }

    let mut exists = |a: PatternAtom| lib.push(Feature::Exists { atom: a });
    for form in vocab::CUT_FORMS.iter().chain(vocab::COOK_FORMS) {
        exists(atom(Var, "needs", tok(form)));
    }
    for st in vocab::STATUSES {
        exists(atom(Var, "is", tok(st)));
    }
    exists(atom(Var, "in", tok(vocab::PLAYER)));
    exists(atom(tok(vocab::KNIFE), "in", tok(vocab::PLAYER)));
    exists(atom(tok(vocab::MEAL), "in", tok(vocab::PLAYER)));
    exists(atom(Var, "part_of", tok(vocab::COOKBOOK)));
    exists(atom(tok(vocab::COOKBOOK), "in", Var));
    for app in vocab::APPLIANCES {
        exists(atom(tok(app), "in", Var));
    }
    exists(atom(tok(vocab::KNIFE), "in", Var));
    for c in vocab::CONTAINERS {
        exists(atom(Var, "in", tok(c)));
        exists(atom(tok(c), "in", Var));
    }

    let mut join = |a: PatternAtom, b: PatternAtom| lib.push(Feature::Join { first: a, second: b });
    let held = || atom(Var, "in", tok(vocab::PLAYER));
    let recipe = || atom(Var, "part_of", tok(vocab::COOKBOOK));
    let at = || atom(tok(vocab::PLAYER), "at", Var);
    for form in vocab::CUT_FORMS.iter().chain(vocab::COOK_FORMS) {
        join(held(), atom(Var, "needs", tok(form)));
        join(recipe(), atom(Var, "needs", tok(form)));
    }
    for st in vocab::STATUSES {
        join(held(), atom(Var, "is", tok(st)));
        join(recipe(), atom(Var, "is", tok(st)));
    }
    join(held(), recipe());
    for c in vocab::CONTAINERS {
        join(recipe(), atom(Var, "in", tok(c)));
        join(at(), atom(tok(c), "in", Var));
    }
    for form in vocab::CUT_FORMS {
        join(atom(Var, "needs", tok(form)), atom(Var, "is", tok("uncut")));
    }
    for form in vocab::COOK_FORMS {
        join(atom(Var, "needs", tok(form)), atom(Var, "is", tok("raw")));
    }
    join(at(), atom(tok(vocab::COOKBOOK), "in", Var));
    join(at(), atom(tok(vocab::KNIFE), "in", Var));
    for app in vocab::APPLIANCES {
        join(at(), atom(tok(app), "in", Var));
    }
    for dir in vocab::DIRECTIONS {
        let rel = vocab::direction_relation(dir).unwrap();
        join(at(), (Any, tok(rel), Var));
    }

    lib.push(Feature::Bias);
    lib
}

fn atom_matches<'g, 'a: 'g>(
    g: &'g KnowledgeGraph,
    a: &'a PatternAtom,
) -> impl Iterator<Item = (&'g crate::kg::Triple, Option<&'g str>)> + 'g {
    g.edges().filter_map(move |t| {
        let mut witness: Option<&str> = None;
        for (term, val) in [
            (&a.0, t.head.as_str()),
            (&a.1, t.relation.as_str()),
            (&a.2, t.tail.as_str()),
        ] {
            match term {
                PatternTerm::Token(want) => {
                    if want != val {
                        return None;
                    }
                }
                PatternTerm::Var => match witness {
                    Some(w) => {
                        if w != val {
                            return None;
                        }
                    }
                    None => witness = Some(val),
                },
                PatternTerm::Any => {}
            }
        }
        Some((t, witness))
    })
}

fn eval_feature(g: &KnowledgeGraph, f: &Feature) -> f64 {
    match f {
        Feature::RelationCount { relation } => {
            g.edges().filter(|t| t.relation == *relation).count() as f64
        }
        Feature::Exists { atom } => {
            if atom_matches(g, atom).next().is_some() {
                1.0
            } else {
                0.0
            }
        }
        Feature::Join { first, second } => {
            let witnesses: std::collections::BTreeSet<&str> =
                atom_matches(g, first).filter_map(|(_, w)| w).collect();
            if witnesses.is_empty() {
                return 0.0;
            }
            if atom_matches(g, second).any(|(_, w)| match w {
                Some(w) => witnesses.contains(w),
                None => true,
            }) {
                1.0
            } else {
                0.0
            }
        }
        Feature::Bias => 1.0,
    }
}

/// Evaluate the whole library on a state.
pub fn featurize(library: &[Feature], g: &KnowledgeGraph) -> Vec<f64> {
    library.iter().map(|f| eval_feature(g, f)).collect()
}

/// Training configuration for the classifier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrunerHyper {
    pub epochs: u32,
    pub learning_rate: f64,
    pub l2: f64,
    pub batch_size: usize,
    pub holdout_fraction: f64,
}

impl Default for PrunerHyper {
    fn default() -> Self {
        Self {
            epochs: 30,
            learning_rate: 0.1,
            l2: 1e-4,
            batch_size: 64,
            holdout_fraction: 0.1,
        }
    }
}

/// Softmax classifier over the feature library. The output is a
/// probability distribution over the six action types.
///
/// Raw feature values are divided by per-feature scales fitted at
/// training time, so unbounded count features cannot destabilize the
/// gradient steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrunerModel {
    pub library: Vec<Feature>,
    /// Row-major weights, one row per action type.
    pub weights: Vec<Vec<f64>>,
    /// Per-feature divisors, all >= 1.
    pub scale: Vec<f64>,
    pub hyper: PrunerHyper,
}

impl PrunerModel {
    pub fn zeroed(library: Vec<Feature>, hyper: PrunerHyper) -> Self {
        let dim = library.len();
        Self {
            library,
            weights: vec![vec![0.0; dim]; NUM_TYPES],
            scale: vec![1.0; dim],
            hyper,
        }
    }

    pub fn dim(&self) -> usize {
        self.library.len()
    }

    pub fn distribution_from_features(&self, x: &[f64]) -> [f64; NUM_TYPES] {
        let mut z = [0.0; NUM_TYPES];
        for (k, row) in self.weights.iter().enumerate() {
            z[k] = row
                .iter()
                .zip(x)
                .zip(&self.scale)
                .map(|((w, v), s)| w * v / s)
                .sum();
        }
        softmax(&z)
    }

    /// Predicted type and full distribution; ties break toward the
    /// smaller type index.
    pub fn predict(&self, g: &KnowledgeGraph) -> (ActionType, [f64; NUM_TYPES]) {
        let x = featurize(&self.library, g);
        let p = self.distribution_from_features(&x);
        let mut best = 0;
        for k in 1..NUM_TYPES {
            if p[k] > p[best] {
                best = k;
            }
        }
        (ActionType::from_index(best).unwrap(), p)
    }

    /// Types ordered by descending probability, ties toward the smaller
    /// index.
    pub fn ranked_types(&self, g: &KnowledgeGraph) -> Vec<ActionType> {
        let (_, p) = self.predict(g);
        let mut order: Vec<usize> = (0..NUM_TYPES).collect();
        order.sort_by(|&a, &b| p[b].partial_cmp(&p[a]).unwrap().then(a.cmp(&b)));
        order
            .into_iter()
            .map(|i| ActionType::from_index(i).unwrap())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("pruner serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn softmax(z: &[f64; NUM_TYPES]) -> [f64; NUM_TYPES] {
    let max = z.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut out = [0.0; NUM_TYPES];
    let mut sum = 0.0;
    for k in 0..NUM_TYPES {
        out[k] = (z[k] - max).exp();
        sum += out[k];
    }
    for v in &mut out {
        *v /= sum;
    }
    out
}

/// Mean cross-entropy plus L2 penalty over a batch of (features, label).
pub fn loss(model: &PrunerModel, batch: &[(&Vec<f64>, ActionType)]) -> f64 {
    let mut total = 0.0;
    for (x, y) in batch {
        let p = model.distribution_from_features(x);
        total += -(p[y.index()].max(1e-300)).ln();
    }
    let l2: f64 = model
        .weights
        .iter()
        .flat_map(|row| row.iter())
        .map(|w| w * w)
        .sum();
    total / batch.len() as f64 + 0.5 * model.hyper.l2 * l2
}

/// Analytic gradient of `loss` with respect to every weight, in the same
/// row-major layout.
pub fn loss_gradient(model: &PrunerModel, batch: &[(&Vec<f64>, ActionType)]) -> Vec<Vec<f64>> {
    let dim = model.dim();
    let mut grad = vec![vec![0.0; dim]; NUM_TYPES];
    let scale = 1.0 / batch.len() as f64;
    for (x, y) in batch {
        let p = model.distribution_from_features(x);
        for k in 0..NUM_TYPES {
            let err = p[k] - if k == y.index() { 1.0 } else { 0.0 };
            let row = &mut grad[k];
            for ((g, v), s) in row.iter_mut().zip(x.iter()).zip(&model.scale) {
                *g += scale * err * v / s;
            }
        }
    }
    for (grow, wrow) in grad.iter_mut().zip(&model.weights) {
        for (g, w) in grow.iter_mut().zip(wrow) {
            *g += model.hyper.l2 * w;
        }
    }
    grad
}

/// Relative error between the analytic gradient and central finite
/// differences of `loss` on one sample, over the full weight vector.
pub fn gradient_check(model: &PrunerModel, x: &Vec<f64>, y: ActionType) -> f64 {
    let batch: Vec<(&Vec<f64>, ActionType)> = vec![(x, y)];
    let analytic = loss_gradient(model, &batch);
    let eps = 1e-5;
    let mut diff_sq = 0.0;
    let mut norm_sq = 0.0;
    let mut probe = model.clone();
    for k in 0..NUM_TYPES {
        for j in 0..model.dim() {
            let orig = probe.weights[k][j];
            probe.weights[k][j] = orig + eps;
            let up = loss(&probe, &batch);
            probe.weights[k][j] = orig - eps;
            let down = loss(&probe, &batch);
            probe.weights[k][j] = orig;
            let numeric = (up - down) / (2.0 * eps);
            diff_sq += (analytic[k][j] - numeric).powi(2);
            norm_sq += analytic[k][j].powi(2).max(numeric.powi(2));
        }
    }
    (diff_sq / norm_sq.max(1e-300)).sqrt()
}

/// A trained model with its training diagnostics.
#[derive(Clone, Debug)]
pub struct TrainedPruner {
    pub model: PrunerModel,
    pub final_loss: f64,
    pub holdout_accuracy: f64,
}

/// Train by mini-batch gradient descent on cross-entropy with L2
/// regularization, reporting final training loss and accuracy on a
/// held-out split.
pub fn train_pruner(
    records: &[LabeledDemoRecord],
    hyper: PrunerHyper,
    seed: u64,
) -> Result<TrainedPruner> {
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let library = standard_library();
    let xs: Vec<Vec<f64>> = records
        .iter()
        .map(|r| featurize(&library, &r.state))
        .collect();
    let ys: Vec<ActionType> = records.iter().map(|r| r.type_id).collect();

    let mut order: Vec<usize> = (0..records.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(seed, "train-pruner", &[]));
    order.shuffle(&mut rng);
    let n_holdout = ((records.len() as f64 * hyper.holdout_fraction) as usize)
        .min(records.len().saturating_sub(1));
    let (holdout_idx, train_idx) = order.split_at(n_holdout);

    let mut model = PrunerModel::zeroed(library, hyper);
    for &i in train_idx {
        for (s, v) in model.scale.iter_mut().zip(&xs[i]) {
            *s = s.max(v.abs());
        }
    }
    let mut train_order: Vec<usize> = train_idx.to_vec();
    let batch_size = hyper.batch_size.max(1);
    for _ in 0..hyper.epochs {
        train_order.shuffle(&mut rng);
        for chunk in train_order.chunks(batch_size) {
            let batch: Vec<(&Vec<f64>, ActionType)> =
                chunk.iter().map(|&i| (&xs[i], ys[i])).collect();
            let grad = loss_gradient(&model, &batch);
            for (wrow, grow) in model.weights.iter_mut().zip(&grad) {
                for (w, g) in wrow.iter_mut().zip(grow) {
                    *w -= hyper.learning_rate * g;
                }
            }
        }
    }

    let train_batch: Vec<(&Vec<f64>, ActionType)> =
        train_idx.iter().map(|&i| (&xs[i], ys[i])).collect();
    let final_loss = loss(&model, &train_batch);
    let holdout_accuracy = if holdout_idx.is_empty() {
        1.0
    } else {
        let correct = holdout_idx
            .iter()
            .filter(|&&i| {
                let p = model.distribution_from_features(&xs[i]);
                let mut best = 0;
                for k in 1..NUM_TYPES {
                    if p[k] > p[best] {
                        best = k;
                    }
                }
                best == ys[i].index()
            })
            .count();
        correct as f64 / holdout_idx.len() as f64
    };
    Ok(TrainedPruner {
        model,
        final_loss,
        holdout_accuracy,
    })
}

/// Rename every ingredient/room entity token via the given map, leaving
/// closed-vocabulary tokens alone. Test helper for the invariance
/// property, usable from integration suites.
pub fn rename_entities(
    g: &KnowledgeGraph,
    map: &std::collections::BTreeMap<String, String>,
) -> KnowledgeGraph {
    let sub = |t: &str| map.get(t).cloned().unwrap_or_else(|| t.to_string());
    g.edges()
        .map(|t| crate::kg::Triple::new(sub(&t.head), sub(&t.relation), sub(&t.tail)))
        .collect()
}
