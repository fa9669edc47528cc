use kgpolicy::cookworld::{Env, EnvSpec};
use kgpolicy::harness::{perturb, NoiseVocab};
use kgpolicy::teacher::QPolicy;
use rand::SeedableRng;

fn main() {
    let q = QPolicy::from_json(&std::fs::read_to_string("/tmp/smoke/q2.json").unwrap()).unwrap();
    let envs: Vec<Env> = (0..20).map(|i| Env::generate(EnvSpec { difficulty: 2, seed: kgpolicy::seeds::derive(7, "train-env", &[2, i]) }).unwrap()).collect();
    let vocab = NoiseVocab::from_envs(&envs);
    println!("vocab: {} tokens, {} relations", vocab.tokens.len(), vocab.relations.len());
    // Drive env 0 with oracle until a cut candidate exists; then compare Q rankings clean vs noisy.
    let mut env = envs[0].clone();
    env.reset();
    let mut teacher = kgpolicy::teacher::OracleTeacher;
    use kgpolicy::teacher::TeacherPolicy;
    loop {
        let cands = env.action_candidates();
        if cands.iter().any(|c| c.ends_with("with knife")) {
            let clean_choice = q.greedy(env.graph(), &cands).unwrap();
            println!("cut-state candidates: {}", cands.len());
            for c in &cands {
                println!("  clean Q({c}) = {:.4}", q.value(env.graph(), c));
            }
            println!("clean choice: {clean_choice}");
            let mut flips = 0;
            for seed in 0..200u64 {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let noisy = perturb(env.graph(), 0.2, 0.03, &vocab, &mut rng);
                if q.greedy(&noisy, &cands).unwrap() != clean_choice { flips += 1; }
            }
            println!("flip rate at (0.2,0.03) over 200 draws: {}%", flips as f64 / 2.0);
            let mut flips = 0;
            for seed in 0..200u64 {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let noisy = perturb(env.graph(), 0.6, 0.06, &vocab, &mut rng);
                if q.greedy(&noisy, &cands).unwrap() != clean_choice { flips += 1; }
            }
            println!("flip rate at (0.6,0.06): {}%", flips as f64 / 2.0);
            break;
        }
        let a = teacher.action(env.graph(), &cands).unwrap();
        env.step(&a).unwrap();
    }
}
