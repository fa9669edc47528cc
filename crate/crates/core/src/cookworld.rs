//! Procedurally generated cooking games whose states are knowledge
//! graphs and whose actions are templated text.
//!
//! A game asks the player to collect the recipe ingredients listed on the
//! cookbook, process them (cut with the knife, cook with the right
//! appliance), then prepare and eat the meal. Processing a recipe
//! ingredient the wrong way, or preparing the meal before every
//! requirement is met, ends the episode unsuccessfully. Episodes also end
//! at the step limit.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::actions::{self, ActionType};
use crate::error::{Error, Result};
use crate::kg::{KnowledgeGraph, Triple};
use crate::seeds;
use crate::vocab;

pub const STEP_LIMIT: u32 = 50;

/// Which game to generate: a difficulty level and a seed. Generation is a
/// pure function of both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EnvSpec {
    pub difficulty: u8,
    pub seed: u64,
}

impl EnvSpec {
    pub fn new(difficulty: u8, seed: u64) -> Result<Self> {
        if !(1..=4).contains(&difficulty) {
            return Err(Error::InvalidDifficulty(difficulty));
        }
        Ok(Self { difficulty, seed })
    }

    pub fn params(&self) -> DifficultyParams {
        DifficultyParams::for_difficulty(self.difficulty)
    }

    pub fn id(&self) -> String {
        format!("d{}-s{}", self.difficulty, self.seed)
    }
}

/// Structural parameters per difficulty level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DifficultyParams {
    pub recipe_size: usize,
    pub n_locations: usize,
    pub need_cut: bool,
    pub need_cook: bool,
    pub n_subtasks: u32,
    pub n_distractors: usize,
    pub containers_per_room: usize,
}

impl DifficultyParams {
    pub fn for_difficulty(difficulty: u8) -> Self {
        match difficulty {
            1 => Self {
                recipe_size: 1,
                n_locations: 1,
                need_cut: true,
                need_cook: false,
                n_subtasks: 4,
                n_distractors: 9,
                containers_per_room: 4,
            },
            2 => Self {
                recipe_size: 1,
                n_locations: 1,
                need_cut: true,
                need_cook: true,
                n_subtasks: 5,
                n_distractors: 9,
                containers_per_room: 4,
            },
            3 => Self {
                recipe_size: 1,
                n_locations: 9,
                need_cut: false,
                need_cook: false,
                n_subtasks: 3,
                n_distractors: 18,
                containers_per_room: 1,
            },
            4 => Self {
                recipe_size: 3,
                n_locations: 6,
                need_cut: true,
                need_cook: true,
                n_subtasks: 11,
                n_distractors: 12,
                containers_per_room: 2,
            },
            other => panic!("difficulty {other} out of range"),
        }
    }
}

/// Mutable episode state on top of the generated world.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub graph: KnowledgeGraph,
    pub steps_taken: u32,
    pub points: u32,
    pub done: bool,
}

/// A generated game plus its current episode state.
#[derive(Clone, Debug)]
pub struct Env {
    spec: EnvSpec,
    params: DifficultyParams,
    initial: KnowledgeGraph,
    state: GameState,
}

#[derive(Serialize, Deserialize)]
struct EnvDump {
    spec: EnvSpec,
    graph: KnowledgeGraph,
    steps_taken: u32,
    points: u32,
    done: bool,
}

impl Env {
    /// Deterministically generate the game for a spec.
    pub fn generate(spec: EnvSpec) -> Result<Env> {
        EnvSpec::new(spec.difficulty, spec.seed)?;
        let params = spec.params();
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(
            spec.seed,
            "env",
            &[spec.difficulty as u64],
        ));
        let mut g = KnowledgeGraph::new();

        // Rooms laid out on an integer lattice, grown as a random tree;
        // every pair of lattice-adjacent rooms is connected both ways, so
        // the geometry is consistent by construction.
        let mut rooms: Vec<(String, (i32, i32))> = vec![("kitchen".to_string(), (0, 0))];
        let mut extra: Vec<&str> = vocab::ROOMS
            .iter()
            .copied()
            .filter(|r| *r != "kitchen")
            .collect();
        extra.shuffle(&mut rng);
        for room in extra.into_iter().take(params.n_locations - 1) {
            let mut slots: Vec<(i32, i32)> = Vec::new();
            for (_, (x, y)) in &rooms {
                for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    let cell = (x + dx, y + dy);
                    if !rooms.iter().any(|(_, p)| *p == cell) && !slots.contains(&cell) {
                        slots.push(cell);
                    }
                }
            }
            slots.sort_unstable();
            let cell = slots[rng.random_range(0..slots.len())];
            rooms.push((room.to_string(), cell));
        }
        for (a, pa) in &rooms {
            for (b, pb) in &rooms {
                if *pa == (pb.0 + 1, pb.1) {
                    g.insert(Triple::new(a.clone(), "east_of", b.clone()));
                    g.insert(Triple::new(b.clone(), "west_of", a.clone()));
                }
                if *pa == (pb.0, pb.1 + 1) {
                    g.insert(Triple::new(a.clone(), "north_of", b.clone()));
                    g.insert(Triple::new(b.clone(), "south_of", a.clone()));
                }
            }
        }

        // Containers, unique per environment, spread round-robin over rooms.
        let mut container_pool: Vec<&str> = vocab::CONTAINERS.to_vec();
        container_pool.shuffle(&mut rng);
        let n_containers = params.containers_per_room * rooms.len();
        let containers: Vec<String> = container_pool
            .iter()
            .take(n_containers)
            .map(|c| c.to_string())
            .collect();
        for (i, c) in containers.iter().enumerate() {
            let room = &rooms[i % rooms.len()].0;
            g.insert(Triple::new(c.clone(), "in", room.clone()));
        }

        // Recipe and distractor ingredients.
        let mut ingredient_pool: Vec<&str> = vocab::INGREDIENTS.to_vec();
        ingredient_pool.shuffle(&mut rng);
        let n_ingredients = params.recipe_size + params.n_distractors;
        let ingredients: Vec<String> = ingredient_pool
            .iter()
            .take(n_ingredients)
            .map(|s| s.to_string())
            .collect();
        let recipe: Vec<String> = ingredients[..params.recipe_size].to_vec();
        for ing in &ingredients {
            let c = &containers[rng.random_range(0..containers.len())];
            g.insert(Triple::new(ing.clone(), "in", c.clone()));
            g.insert(Triple::new(ing.clone(), "is", "uncut"));
            g.insert(Triple::new(ing.clone(), "is", "raw"));
        }

        g.insert(Triple::new(vocab::COOKBOOK, "in", "kitchen"));
        for ing in &recipe {
            g.insert(Triple::new(ing.clone(), "part_of", vocab::COOKBOOK));
            if params.need_cut {
                let form = vocab::CUT_FORMS[rng.random_range(0..vocab::CUT_FORMS.len())];
                g.insert(Triple::new(ing.clone(), "needs", form));
            }
            if params.need_cook {
                let form = vocab::COOK_FORMS[rng.random_range(0..vocab::COOK_FORMS.len())];
                g.insert(Triple::new(ing.clone(), "needs", form));
            }
        }

        if params.need_cut {
            let c = &containers[rng.random_range(0..containers.len())];
            g.insert(Triple::new(vocab::KNIFE, "in", c.clone()));
        }
        if params.need_cook {
            for app in vocab::APPLIANCES {
                g.insert(Triple::new(*app, "in", "kitchen"));
            }
        }

        let start = &rooms[rng.random_range(0..rooms.len())].0;
        g.insert(Triple::new(vocab::PLAYER, "at", start.clone()));

        Ok(Env {
            spec,
            params,
            state: GameState {
                graph: g.clone(),
                steps_taken: 0,
                points: 0,
                done: false,
            },
            initial: g,
        })
    }

    pub fn spec(&self) -> EnvSpec {
        self.spec
    }

    pub fn params(&self) -> DifficultyParams {
        self.params
    }

    pub fn id(&self) -> String {
        self.spec.id()
    }

    pub fn n_subtasks(&self) -> u32 {
        self.params.n_subtasks
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn graph(&self) -> &KnowledgeGraph {
        &self.state.graph
    }

    pub fn initial_graph(&self) -> &KnowledgeGraph {
        &self.initial
    }

    /// Restore the generated initial state.
    pub fn reset(&mut self) -> &GameState {
        self.state = GameState {
            graph: self.initial.clone(),
            steps_taken: 0,
            points: 0,
            done: false,
        };
        &self.state
    }

    pub fn normalized_score(&self) -> f64 {
        self.state.points as f64 / self.params.n_subtasks as f64
    }

    /// All template instantiations whose static preconditions hold in the
    /// current state, in template-major order, sorted within a template.
    /// Empty once the episode is over.
    pub fn action_candidates(&self) -> Vec<String> {
        if self.state.done {
            return Vec::new();
        }
        candidates_of(&self.state.graph)
    }

    /// Apply one action. Returns (reward, done). The action must be a
    /// current candidate.
    pub fn step(&mut self, action: &str) -> Result<(f64, bool)> {
        if self.state.done {
            return Err(Error::EpisodeOver);
        }
        if !self.action_candidates().iter().any(|c| c == action) {
            return Err(Error::NotACandidate(action.to_string()));
        }
        let (ty, base) = actions::parse_action(action)?;
        let b = actions::derive_bindings(&base, &self.state.graph);
        let g = &mut self.state.graph;
        let mut reward = 0.0;

        match ty {
            ActionType::Go => {
                let here = b
                    .get(actions::slots::HERE)
                    .expect("player location")
                    .to_string();
                let dest = b
                    .get(actions::slots::DEST)
                    .ok_or_else(|| Error::CorruptState("no destination for go".into()))?
                    .to_string();
                g.remove(&Triple::new(vocab::PLAYER, "at", here));
                g.insert(Triple::new(vocab::PLAYER, "at", dest));
            }
            ActionType::Take => {
                let obj = b.get(actions::slots::OBJ).unwrap().to_string();
                let rec = b.get(actions::slots::REC).unwrap().to_string();
                g.remove(&Triple::new(obj.clone(), "in", rec));
                g.insert(Triple::new(obj.clone(), "in", vocab::PLAYER));
                if g.contains(&Triple::new(obj.clone(), "part_of", vocab::COOKBOOK)) {
                    reward = 1.0;
                }
            }
            ActionType::Cut => {
                let obj = b.get(actions::slots::OBJ).unwrap().to_string();
                let form = b.get(actions::slots::VERB_PASSIVE).unwrap().to_string();
                g.remove(&Triple::new(obj.clone(), "is", "uncut"));
                g.insert(Triple::new(obj.clone(), "is", form.clone()));
                if g.contains(&Triple::new(obj.clone(), "part_of", vocab::COOKBOOK)) {
                    if g.remove(&Triple::new(obj.clone(), "needs", form)) {
                        reward = 1.0;
                    } else {
                        self.state.done = true;
                    }
                }
            }
            ActionType::Cook => {
                let obj = b.get(actions::slots::OBJ).unwrap().to_string();
                let result = b.get(actions::slots::COOK_RESULT).unwrap().to_string();
                g.remove(&Triple::new(obj.clone(), "is", "raw"));
                g.insert(Triple::new(obj.clone(), "is", result.clone()));
                if g.contains(&Triple::new(obj.clone(), "part_of", vocab::COOKBOOK)) {
                    if g.remove(&Triple::new(obj.clone(), "needs", result)) {
                        reward = 1.0;
                    } else {
                        self.state.done = true;
                    }
                }
            }
            ActionType::Prepare => {
                let recipe = recipe_ingredients(g);
                let ready = recipe.iter().all(|ing| {
                    g.contains(&Triple::new(ing.clone(), "in", vocab::PLAYER))
                        && !g.edges().any(|t| t.head == *ing && t.relation == "needs")
                });
                // Preparing too early quietly fails; only mishandling an
                // ingredient is irrecoverable.
                if ready {
                    for ing in &recipe {
                        g.remove(&Triple::new(ing.clone(), "in", vocab::PLAYER));
                        let statuses: Vec<Triple> = g
                            .edges()
                            .filter(|t| t.head == *ing && t.relation == "is")
                            .cloned()
                            .collect();
                        for t in statuses {
                            g.remove(&t);
                        }
                    }
                    g.insert(Triple::new(vocab::MEAL, "in", vocab::PLAYER));
                    reward = 1.0;
                }
            }
            ActionType::Eat => {
                g.remove(&Triple::new(vocab::MEAL, "in", vocab::PLAYER));
                reward = 1.0;
                self.state.done = true;
            }
        }

        if reward > 0.0 {
            self.state.points += 1;
        }
        self.state.steps_taken += 1;
        if self.state.steps_taken >= STEP_LIMIT {
            self.state.done = true;
        }
        Ok((reward, self.state.done))
    }

    pub fn dump_json(&self) -> String {
        serde_json::to_string_pretty(&EnvDump {
            spec: self.spec,
            graph: self.state.graph.clone(),
            steps_taken: self.state.steps_taken,
            points: self.state.points,
            done: self.state.done,
        })
        .expect("env serialization cannot fail")
    }

    pub fn load_json(s: &str) -> Result<Env> {
        let dump: EnvDump = serde_json::from_str(s)?;
        let mut env = Env::generate(dump.spec)?;
        env.state = GameState {
            graph: dump.graph,
            steps_taken: dump.steps_taken,
            points: dump.points,
            done: dump.done,
        };
        Ok(env)
    }
}

/// Candidate enumeration on a raw state graph.
pub fn candidates_of(g: &KnowledgeGraph) -> Vec<String> {
    let mut out = Vec::new();
    let here = match player_room(g) {
        Ok(r) => r,
        Err(_) => return out,
    };

    for dir in vocab::DIRECTIONS {
        let rel = vocab::direction_relation(dir).unwrap();
        if g.edges().any(|t| t.relation == rel && t.tail == here) {
            out.push(format!("go {dir}"));
        }
    }

    let mut takes = Vec::new();
    let here_containers: BTreeSet<&str> = g
        .edges()
        .filter(|t| t.relation == "in" && t.tail == here && vocab::is_container(&t.head))
        .map(|t| t.head.as_str())
        .collect();
    for t in g.edges() {
        if t.relation == "in"
            && here_containers.contains(t.tail.as_str())
            && (vocab::is_ingredient(&t.head) || t.head == vocab::KNIFE)
        {
            takes.push(format!("take {} from {}", t.head, t.tail));
        }
    }
    takes.sort_unstable();
    out.extend(takes);

    let knife_held = g.contains(&Triple::new(vocab::KNIFE, "in", vocab::PLAYER));
    if knife_held {
        let mut cuts = Vec::new();
        for t in g.edges() {
            if t.relation == "in"
                && t.tail == vocab::PLAYER
                && vocab::is_ingredient(&t.head)
                && g.contains(&Triple::new(t.head.clone(), "is", "uncut"))
            {
                for verb in vocab::CUT_VERBS {
                    cuts.push(format!("{verb} {} with knife", t.head));
                }
            }
        }
        cuts.sort_unstable();
        out.extend(cuts);
    }

    let here_appliances: Vec<&str> = vocab::APPLIANCES
        .iter()
        .copied()
        .filter(|a| g.contains(&Triple::new(*a, "in", here.clone())))
        .collect();
    if !here_appliances.is_empty() {
        let mut cooks = Vec::new();
        for t in g.edges() {
            if t.relation == "in"
                && t.tail == vocab::PLAYER
                && vocab::is_ingredient(&t.head)
                && g.contains(&Triple::new(t.head.clone(), "is", "raw"))
            {
                for app in &here_appliances {
                    cooks.push(format!("cook {} with {app}", t.head));
                }
            }
        }
        cooks.sort_unstable();
        out.extend(cooks);
    }

    let meal_exists = g.edges().any(|t| t.head == vocab::MEAL);
    if g.contains(&Triple::new(vocab::COOKBOOK, "in", here.clone())) && !meal_exists {
        out.push("prepare meal".to_string());
    }
    if g.contains(&Triple::new(vocab::MEAL, "in", vocab::PLAYER)) {
        out.push("eat meal".to_string());
    }
    out
}

/// The room the player is at. Errors on states without a location edge.
pub fn player_room(g: &KnowledgeGraph) -> Result<String> {
    g.edges()
        .find(|t| t.head == vocab::PLAYER && t.relation == "at")
        .map(|t| t.tail.clone())
        .ok_or_else(|| Error::CorruptState("no player location edge".into()))
}

/// Recipe ingredients read off the cookbook edges, sorted.
pub fn recipe_ingredients(g: &KnowledgeGraph) -> Vec<String> {
    g.edges()
        .filter(|t| t.relation == "part_of" && t.tail == vocab::COOKBOOK)
        .map(|t| t.head.clone())
        .collect()
}

/// Room adjacency from direction edges: the rooms reached from `room` by
/// each direction, in alphabetical direction order.
pub fn room_neighbors(g: &KnowledgeGraph, room: &str) -> Vec<(&'static str, String)> {
    let mut out = Vec::new();
    for dir in vocab::DIRECTIONS {
        let rel = vocab::direction_relation(dir).unwrap();
        for t in g.edges() {
            if t.relation == rel && t.tail == room {
                out.push((*dir, t.head.clone()));
            }
        }
    }
    out
}

/// The room that holds `token` through a container: follows
/// (token, in, C), (C, in, room).
pub fn room_holding(g: &KnowledgeGraph, token: &str) -> Option<String> {
    let container = g
        .edges()
        .find(|t| t.head == token && t.relation == "in" && vocab::is_container(&t.tail))?
        .tail
        .clone();
    g.edges()
        .find(|t| t.head == container && t.relation == "in" && !vocab::is_container(&t.tail))
        .map(|t| t.tail.clone())
}

/// First move of a shortest path from `from` to the nearest room in
/// `targets`, as a direction token. Deterministic: breadth-first search
/// expanding directions in alphabetical order. `None` when already there
/// or unreachable.
pub fn bfs_first_step(
    g: &KnowledgeGraph,
    from: &str,
    targets: &BTreeSet<String>,
) -> Option<String> {
    if targets.contains(from) {
        return None;
    }
    let mut visited: BTreeMap<String, String> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for (dir, next) in room_neighbors(g, from) {
        if !visited.contains_key(&next) && next != from {
            if targets.contains(&next) {
                return Some(dir.to_string());
            }
            visited.insert(next.clone(), dir.to_string());
            queue.push_back(next);
        }
    }
    while let Some(room) = queue.pop_front() {
        let first = visited[&room].clone();
        for (_, next) in room_neighbors(g, &room) {
            if !visited.contains_key(&next) && next != from {
                if targets.contains(&next) {
                    return Some(first);
                }
                visited.insert(next.clone(), first.clone());
                queue.push_back(next);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(difficulty: u8, seed: u64) -> Env {
        Env::generate(EnvSpec { difficulty, seed }).unwrap()
    }

    #[test]
    fn difficulty_table_is_respected() {
        for (d, recipe, rooms, cut, cook, subtasks) in [
            (1u8, 1usize, 1usize, true, false, 4u32),
            (2, 1, 1, true, true, 5),
            (3, 1, 9, false, false, 3),
            (4, 3, 6, true, true, 11),
        ] {
            let p = DifficultyParams::for_difficulty(d);
            assert_eq!(p.recipe_size, recipe);
            assert_eq!(p.n_locations, rooms);
            assert_eq!(p.need_cut, cut);
            assert_eq!(p.need_cook, cook);
            assert_eq!(p.n_subtasks, subtasks);
            assert_eq!(
                p.n_subtasks as usize,
                p.recipe_size * (1 + cut as usize + cook as usize) + 2
            );
        }
    }

    #[test]
    fn invalid_difficulty_is_rejected() {
        assert!(Env::generate(EnvSpec {
            difficulty: 0,
            seed: 1
        })
        .is_err());
        assert!(Env::generate(EnvSpec {
            difficulty: 5,
            seed: 1
        })
        .is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        for d in 1..=4 {
            let a = env(d, 1234);
            let b = env(d, 1234);
            assert_eq!(a.graph(), b.graph());
            assert_ne!(a.graph(), env(d, 1235).graph());
        }
    }

    #[test]
    fn difficulty_1_shape() {
        let e = env(1, 7);
        let g = e.graph();
        let needs: Vec<&Triple> = g.edges().filter(|t| t.relation == "needs").collect();
        assert_eq!(needs.len(), 1);
        assert!(vocab::is_cut_form(&needs[0].tail));
        assert!(!g
            .edges()
            .any(|t| vocab::DIRECTIONS.iter().any(|d| t.relation
                == vocab::direction_relation(d).unwrap())));
        assert_eq!(recipe_ingredients(g).len(), 1);
        assert!(!g
            .edges()
            .any(|t| vocab::APPLIANCES.contains(&t.head.as_str())));
    }

    #[test]
    fn difficulty_3_shape() {
        let e = env(3, 7);
        let g = e.graph();
        assert!(!g.edges().any(|t| t.relation == "needs"));
        let rooms: BTreeSet<&str> = g
            .edges()
            .filter(|t| {
                vocab::DIRECTIONS
                    .iter()
                    .any(|d| t.relation == vocab::direction_relation(d).unwrap())
            })
            .flat_map(|t| [t.head.as_str(), t.tail.as_str()])
            .collect();
        assert_eq!(rooms.len(), 9);
    }

    #[test]
    fn direction_edges_are_symmetric() {
        let e = env(4, 99);
        let g = e.graph();
        for t in g.edges() {
            let mirror = match t.relation.as_str() {
                "east_of" => Some("west_of"),
                "west_of" => Some("east_of"),
                "north_of" => Some("south_of"),
                "south_of" => Some("north_of"),
                _ => None,
            };
            if let Some(m) = mirror {
                assert!(g.contains(&Triple::new(t.tail.clone(), m, t.head.clone())));
            }
        }
    }

    #[test]
    fn initial_candidates_difficulty_1() {
        let e = env(1, 3);
        let cands = e.action_candidates();
        assert!(!cands.is_empty());
        assert!(cands.iter().all(|c| !c.starts_with("go ")));
        assert!(cands.iter().any(|c| c.starts_with("take ")));
        assert!(cands.iter().any(|c| c == "prepare meal"));
        for c in &cands {
            actions::parse_action(c).unwrap();
        }
    }

    fn take_object(e: &mut Env, obj: &str) {
        let cand = e
            .action_candidates()
            .into_iter()
            .find(|c| c.starts_with(&format!("take {obj} ")))
            .unwrap_or_else(|| panic!("no take candidate for {obj}"));
        e.step(&cand).unwrap();
    }

    #[test]
    fn correct_cut_rewards_and_rewrites() {
        let mut e = env(1, 11);
        let recipe = recipe_ingredients(e.graph())[0].clone();
        let form = e
            .graph()
            .edges()
            .find(|t| t.head == recipe && t.relation == "needs")
            .unwrap()
            .tail
            .clone();
        let verb = vocab::verb_for_cut_form(&form).unwrap();
        take_object(&mut e, "knife");
        take_object(&mut e, &recipe);
        assert_eq!(e.state().points, 1);
        let action = format!("{verb} {recipe} with knife");
        assert!(e.action_candidates().contains(&action));
        let (r, done) = e.step(&action).unwrap();
        assert_eq!(r, 1.0);
        assert!(!done);
        assert!(e
            .graph()
            .contains(&Triple::new(recipe.clone(), "is", form.clone())));
        assert!(!e
            .graph()
            .contains(&Triple::new(recipe.clone(), "needs", form)));
    }

    #[test]
    fn wrong_cut_fails_the_episode() {
        let mut e = env(1, 11);
        let recipe = recipe_ingredients(e.graph())[0].clone();
        let form = e
            .graph()
            .edges()
            .find(|t| t.head == recipe && t.relation == "needs")
            .unwrap()
            .tail
            .clone();
        let wrong = vocab::CUT_VERBS
            .iter()
            .find(|v| vocab::cut_form_of(v) != Some(form.as_str()))
            .unwrap();
        take_object(&mut e, "knife");
        take_object(&mut e, &recipe);
        let (r, done) = e.step(&format!("{wrong} {recipe} with knife")).unwrap();
        assert_eq!(r, 0.0);
        assert!(done);
        assert!(e.normalized_score() < 1.0);
        assert!(e.action_candidates().is_empty());
    }

    #[test]
    fn cutting_a_distractor_is_harmless() {
        let mut e = env(1, 11);
        let recipe = recipe_ingredients(e.graph())[0].clone();
        let distractor = e
            .graph()
            .edges()
            .filter(|t| t.relation == "is" && t.tail == "uncut")
            .map(|t| t.head.clone())
            .find(|i| *i != recipe)
            .unwrap();
        take_object(&mut e, "knife");
        take_object(&mut e, &distractor);
        let (r, done) = e.step(&format!("chop {distractor} with knife")).unwrap();
        assert_eq!(r, 0.0);
        assert!(!done);
    }

    #[test]
    fn movement_rewrites_player_location() {
        let mut e = env(3, 5);
        let here = player_room(e.graph()).unwrap();
        let (dir, dest) = room_neighbors(e.graph(), &here)[0].clone();
        e.step(&format!("go {dir}")).unwrap();
        assert_eq!(player_room(e.graph()).unwrap(), dest);
        assert_eq!(
            e.graph()
                .edges()
                .filter(|t| t.head == vocab::PLAYER && t.relation == "at")
                .count(),
            1
        );
    }

    #[test]
    fn premature_prepare_is_a_quiet_failure() {
        let mut e = env(1, 2);
        assert!(e.action_candidates().contains(&"prepare meal".to_string()));
        let (r, done) = e.step("prepare meal").unwrap();
        assert_eq!(r, 0.0);
        assert!(!done);
        assert_eq!(e.normalized_score(), 0.0);
        assert!(!e.graph().edges().any(|t| t.head == vocab::MEAL));
    }

    #[test]
    fn non_candidate_actions_are_rejected() {
        let mut e = env(1, 2);
        let err = e.step("eat meal").unwrap_err();
        assert!(matches!(err, Error::NotACandidate(_)));
        let err = e.step("go fish").unwrap_err();
        assert!(matches!(err, Error::NotACandidate(_)));
    }

    #[test]
    fn step_limit_terminates_episodes() {
        let mut e = env(3, 8);
        let mut steps = 0;
        loop {
            let cands = e.action_candidates();
            let go = cands.iter().find(|c| c.starts_with("go ")).unwrap().clone();
            let (_, done) = e.step(&go).unwrap();
            steps += 1;
            if done {
                break;
            }
            assert!(steps <= STEP_LIMIT);
        }
        assert_eq!(steps, STEP_LIMIT);
    }

    #[test]
    fn reset_restores_initial_state() {
        let mut e = env(1, 42);
        let initial = e.graph().clone();
        take_object(&mut e, "knife");
        assert_ne!(e.graph(), &initial);
        e.reset();
        assert_eq!(e.graph(), &initial);
        assert_eq!(e.state().steps_taken, 0);
        assert_eq!(e.normalized_score(), 0.0);
    }

    #[test]
    fn dump_load_round_trip() {
        let mut e = env(2, 13);
        take_object(&mut e, "knife");
        let dump = e.dump_json();
        let loaded = Env::load_json(&dump).unwrap();
        assert_eq!(loaded.graph(), e.graph());
        assert_eq!(loaded.state(), e.state());
        assert_eq!(loaded.initial_graph(), e.initial_graph());
    }

    #[test]
    fn bfs_prefers_shortest_paths_over_bearing() {
        // The east exit leads to a dead end; the shortest path to the
        // kitchen starts north even though an east move is available.
        let g = KnowledgeGraph::from_edges([
            Triple::new("shed", "east_of", "pantry"),
            Triple::new("pantry", "west_of", "shed"),
            Triple::new("corridor", "north_of", "pantry"),
            Triple::new("pantry", "south_of", "corridor"),
            Triple::new("kitchen", "east_of", "corridor"),
            Triple::new("corridor", "west_of", "kitchen"),
        ]);
        let targets: BTreeSet<String> = [String::from("kitchen")].into();
        assert_eq!(bfs_first_step(&g, "pantry", &targets), Some("north".into()));
        assert_eq!(bfs_first_step(&g, "kitchen", &targets), None);
        let unreachable: BTreeSet<String> = [String::from("attic")].into();
        assert_eq!(bfs_first_step(&g, "pantry", &unreachable), None);
    }
}
