use kgpolicy::cookworld::{Env, EnvSpec};
use kgpolicy::teacher::{OracleTeacher, TeacherPolicy};

fn main() {
    for d in 1..=4u8 {
        let mut total = 0.0;
        let mut n = 0u32;
        for seed in 0..20u64 {
            let mut env = Env::generate(EnvSpec { difficulty: d, seed: 1000 + seed }).unwrap();
            env.reset();
            loop {
                let cands = env.action_candidates();
                if cands.is_empty() { break; }
                total += cands.len() as f64;
                n += 1;
                let a = OracleTeacher.action(env.graph(), &cands).unwrap();
                let (_, done) = env.step(&a).unwrap();
                if done { break; }
            }
        }
        println!("difficulty {d}: mean candidates {:.2} over {n} states", total / n as f64);
    }
}
