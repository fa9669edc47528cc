use kgpolicy::cookworld::{Env, EnvSpec, recipe_ingredients};
use kgpolicy::miner::RuleBook;
use kgpolicy::policy::HybridPolicy;
use kgpolicy::pruner::PrunerModel;
use kgpolicy::seeds;

fn main() {
    let pruner = PrunerModel::from_json(&std::fs::read_to_string("/tmp/smoke/pruner1r.json").unwrap()).unwrap();
    let rules = RuleBook::from_json(&std::fs::read_to_string("/tmp/smoke/rules1r.json").unwrap()).unwrap();
    let policy = HybridPolicy::new(pruner, rules);
    for i in 0..10u64 {
        let spec = EnvSpec { difficulty: 1, seed: seeds::derive(7, "test-env", &[1, i]) };
        let mut env = Env::generate(spec).unwrap();
        env.reset();
        let recipe = recipe_ingredients(env.graph())[0].clone();
        let form = env.graph().edges().find(|t| t.head == recipe && t.relation == "needs").unwrap().tail.clone();
        let mut actions = Vec::new();
        loop {
            let cands = env.action_candidates();
            if cands.is_empty() { break; }
            let (a, _) = policy.act(env.graph(), &cands).unwrap();
            let (_, done) = env.step(&a).unwrap();
            actions.push(a);
            if done { break; }
        }
        println!("env {i}: recipe {recipe} needs {form}: score {:.2} in {} steps", env.normalized_score(), actions.len());
        if i < 3 { println!("   {:?}", actions); }
    }
}
