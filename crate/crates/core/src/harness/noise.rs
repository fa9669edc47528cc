//! Graph noise: random edge injection and original-edge dropout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::cookworld::Env;
use crate::kg::{KnowledgeGraph, Triple};
use crate::seeds;

/// A noise level: add `ceil(add_frac * |E|)` random edges and drop
/// `ceil(drop_frac * |E|)` original edges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub add_frac: f64,
    pub drop_frac: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(add_frac: f64, drop_frac: f64, seed: u64) -> Self {
        assert!(add_frac >= 0.0, "add fraction must be nonnegative");
        assert!(
            (0.0..=1.0).contains(&drop_frac),
            "drop fraction must be in [0, 1]"
        );
        Self {
            add_frac,
            drop_frac,
            seed,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seeds::derive(self.seed, "noise", &[]))
    }
}

/// The pools random edges draw from: every node token and relation
/// observed across an environment set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseVocab {
    pub tokens: Vec<String>,
    pub relations: Vec<String>,
}

impl NoiseVocab {
    pub fn from_envs<'a>(envs: impl IntoIterator<Item = &'a Env>) -> Self {
        let mut tokens = BTreeSet::new();
        let mut relations = BTreeSet::new();
        for env in envs {
            let g = env.initial_graph();
            tokens.extend(g.node_vocabulary().into_iter().map(str::to_string));
            relations.extend(g.relation_vocabulary().into_iter().map(str::to_string));
        }
        Self {
            tokens: tokens.into_iter().collect(),
            relations: relations.into_iter().collect(),
        }
    }
}

/// Perturb a graph: first add edges drawn uniformly from the vocabulary
/// (redrawing duplicates of anything already present), then drop original
/// edges only. The result always has exactly
/// `|E| + ceil(add*|E|) - ceil(drop*|E|)` edges.
pub fn perturb(
    g: &KnowledgeGraph,
    add_frac: f64,
    drop_frac: f64,
    vocab: &NoiseVocab,
    rng: &mut impl Rng,
) -> KnowledgeGraph {
    let n = g.len();
    let n_add = (add_frac * n as f64).ceil() as usize;
    let n_drop = (drop_frac * n as f64).ceil() as usize;

    let mut out = g.clone();
    let mut added = 0usize;
    let mut attempts = 0usize;
    while added < n_add {
        attempts += 1;
        assert!(
            attempts < 100_000,
            "noise vocabulary too small to add {n_add} fresh edges"
        );
        let head = &vocab.tokens[rng.random_range(0..vocab.tokens.len())];
        let rel = &vocab.relations[rng.random_range(0..vocab.relations.len())];
        let tail = &vocab.tokens[rng.random_range(0..vocab.tokens.len())];
        let t = Triple::new(head.clone(), rel.clone(), tail.clone());
        if out.insert(t) {
            added += 1;
        }
    }

    let originals: Vec<&Triple> = g.edges().collect();
    let dropped = rand::seq::index::sample(rng, originals.len(), n_drop.min(originals.len()));
    for i in dropped.iter() {
        out.remove(originals[i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cookworld::EnvSpec;
    use proptest::prelude::*;

    fn small_vocab() -> NoiseVocab {
        NoiseVocab {
            tokens: ["a", "b", "c", "d", "e", "f"].iter().map(|s| s.to_string()).collect(),
            relations: ["r1", "r2", "r3"].iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn ceiling_arithmetic() {
        let g: KnowledgeGraph = (0..20)
            .map(|i| Triple::new(format!("n{i}"), "r", format!("m{i}")))
            .collect();
        let vocab = small_vocab();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = perturb(&g, 0.2, 0.03, &vocab, &mut rng);
        assert_eq!(out.len(), 20 + 4 - 1);
    }

    #[test]
    fn zero_noise_is_identity() {
        let g: KnowledgeGraph = (0..7)
            .map(|i| Triple::new(format!("n{i}"), "r", format!("m{i}")))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(perturb(&g, 0.0, 0.0, &small_vocab(), &mut rng), g);
    }

    #[test]
    fn dropped_edges_are_original_added_are_fresh() {
        let g: KnowledgeGraph = (0..7)
            .map(|i| Triple::new(format!("n{i}"), "r", format!("m{i}")))
            .collect();
        let vocab = small_vocab();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = perturb(&g, 0.2, 0.06, &vocab, &mut rng);
        assert_eq!(out.len(), 7 + 2 - 1);
        let added: Vec<&Triple> = out.edges().filter(|t| !g.contains(t)).collect();
        assert_eq!(added.len(), 2);
        for t in added {
            assert!(vocab.tokens.contains(&t.head));
            assert!(vocab.relations.contains(&t.relation));
        }
        let dropped: Vec<&Triple> = g.edges().filter(|t| !out.contains(t)).collect();
        assert_eq!(dropped.len(), 1);
    }

    #[test]
    fn vocab_covers_environment_tokens() {
        let envs: Vec<Env> = (0..3)
            .map(|s| Env::generate(EnvSpec { difficulty: 2, seed: s }).unwrap())
            .collect();
        let vocab = NoiseVocab::from_envs(&envs);
        assert!(vocab.tokens.iter().any(|t| t == "player"));
        assert!(vocab.relations.iter().any(|r| r == "needs"));
        for env in &envs {
            for t in env.initial_graph().edges() {
                assert!(vocab.relations.contains(&t.relation));
            }
        }
    }

    proptest! {
        #[test]
        fn edge_count_identity(
            n in 1usize..40,
            add in 0.0f64..0.8,
            drop in 0.0f64..0.2,
            seed in 0u64..1000,
        ) {
            let g: KnowledgeGraph = (0..n)
                .map(|i| Triple::new(format!("n{i}"), "r", format!("m{i}")))
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let vocab = small_vocab();
            let out = perturb(&g, add, drop, &vocab, &mut rng);
            let expect = n + (add * n as f64).ceil() as usize - (drop * n as f64).ceil() as usize;
            prop_assert_eq!(out.len(), expect);
        }
    }
}
