use kgpolicy::cookworld::{Env, EnvSpec};
use kgpolicy::miner::RuleBook;
use kgpolicy::policy::HybridPolicy;
use kgpolicy::pruner::PrunerModel;

fn main() {
    let d: u8 = std::env::args().nth(1).unwrap().parse().unwrap();
    let seed: u64 = std::env::args().nth(2).unwrap().parse().unwrap();
    let dir = std::env::args().nth(3).unwrap_or_else(|| "/tmp/smoke".into());
    let pruner = PrunerModel::from_json(&std::fs::read_to_string(format!("{dir}/pruner{d}.json")).unwrap()).unwrap();
    let rules = RuleBook::from_json(&std::fs::read_to_string(format!("{dir}/rules{d}.json")).unwrap()).unwrap();
    let policy = HybridPolicy::new(pruner, rules);
    let mut env = Env::generate(EnvSpec { difficulty: d, seed }).unwrap();
    env.reset();
    let recipe = kgpolicy::cookworld::recipe_ingredients(env.graph());
    println!("recipe: {recipe:?}");
    loop {
        let cands = env.action_candidates();
        if cands.is_empty() { break; }
        let (a, ex) = policy.act(env.graph(), &cands).unwrap();
        let here = kgpolicy::cookworld::player_room(env.graph()).unwrap();
        let (r, done) = env.step(&a).unwrap();
        println!("[{:2}] at {:<10} predicted={:<7} used={:<7} -> {:<28} r={}",
            env.state().steps_taken, here, ex.predicted_type.name(), ex.used_type.name(), a, r);
        if done { break; }
    }
    println!("score {}", env.normalized_score());
}
