//! Command-line front end for the two-step hybrid policy pipeline.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use kgpolicy::actions::read_jsonl;
use kgpolicy::cookworld::{candidates_of, Env, EnvSpec};
use kgpolicy::harness::{
    evaluate, generate_envs, run_experiment, write_report_files, Config, HybridAgent,
    NoiseVocab, OracleAgent, QAgent, RandomAgent,
};
use kgpolicy::kg::KnowledgeGraph;
use kgpolicy::miner::{mine_rules, GlobalFreqMode, RuleBook};
use kgpolicy::policy::{score_action, HybridPolicy};
use kgpolicy::pruner::{train_pruner, PrunerHyper, PrunerModel};
use kgpolicy::seeds;
use kgpolicy::teacher::{collect_demos, train_q, OracleTeacher, QHyper, QPolicy, RandomTeacher};

#[derive(Parser)]
#[command(name = "kgpolicy", about = "Two-step hybrid policy for cooking games on knowledge graphs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TeacherKind {
    Oracle,
    Q,
    Random,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyKind {
    Hybrid,
    Q,
    Random,
    Oracle,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EnvSet {
    Train,
    Test,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FreqMode {
    OwnBindings,
    ConcreteWitness,
}

impl From<FreqMode> for GlobalFreqMode {
    fn from(m: FreqMode) -> Self {
        match m {
            FreqMode::OwnBindings => GlobalFreqMode::OwnBindings,
            FreqMode::ConcreteWitness => GlobalFreqMode::ConcreteWitness,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate train/test environment sets and write a manifest.
    GenEnvs {
        #[arg(long)]
        difficulty: u8,
        #[arg(long, default_value_t = 10)]
        train: usize,
        #[arg(long, default_value_t = 10)]
        test: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also dump each environment's initial state as JSON into a directory.
        #[arg(long)]
        dump_states: Option<PathBuf>,
    },
    /// Train the Q-learning teacher on generated training environments.
    TrainTeacher {
        #[arg(long)]
        difficulty: u8,
        #[arg(long, default_value_t = 3000)]
        episodes: u32,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        train_envs: usize,
        /// Use an existing manifest instead of generating environments.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Collect labeled demonstrations from a teacher policy.
    CollectDemos {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum)]
        teacher: TeacherKind,
        /// Trained teacher file, required when --teacher q.
        #[arg(long)]
        q_policy: Option<PathBuf>,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long, default_value_t = 20000)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mine the per-type rule book from demonstrations.
    MineRules {
        #[arg(long)]
        demos: PathBuf,
        #[arg(long, default_value_t = 0.3)]
        tau: f64,
        #[arg(long, value_enum, default_value_t = FreqMode::OwnBindings)]
        global_freq: FreqMode,
        /// Print rule counts for a comma-separated list of thresholds.
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the action-type classifier from demonstrations.
    TrainPruner {
        #[arg(long)]
        demos: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a policy on an environment set, optionally under noise.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum, default_value_t = EnvSet::Test)]
        set: EnvSet,
        #[arg(long, value_enum)]
        policy: PolicyKind,
        #[arg(long)]
        pruner: Option<PathBuf>,
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        q_policy: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        episodes: usize,
        #[arg(long, default_value_t = 0.0)]
        noise_add: f64,
        #[arg(long, default_value_t = 0.0)]
        noise_drop: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Write the cell stats as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate hybrid and Q policies over the full noise grid.
    Robustness {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        pruner: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        q_policy: PathBuf,
        #[arg(long, default_value = "0.2,0.4,0.6")]
        noise_add: String,
        #[arg(long, default_value = "0.0,0.03,0.06")]
        noise_drop: String,
        #[arg(long, default_value_t = 5)]
        episodes: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Explain every candidate of a dumped state: type, score, and the
    /// supporting edges that matched or are missing.
    Explain {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        pruner: PathBuf,
    },
    /// Run the whole experiment from a config file and write report
    /// files (report.json, tables.md, tables.csv).
    RunAll {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
    },
}

/// Environment manifest: the spec of every train/test environment.
#[derive(Serialize, Deserialize)]
struct Manifest {
    difficulty: u8,
    seed: u64,
    train: Vec<EnvSpec>,
    test: Vec<EnvSpec>,
}

impl Manifest {
    fn envs(&self, set: EnvSet) -> Result<Vec<Env>> {
        let specs = match set {
            EnvSet::Train => &self.train,
            EnvSet::Test => &self.test,
        };
        Ok(specs
            .iter()
            .map(|s| Env::generate(*s))
            .collect::<kgpolicy::Result<_>>()?)
    }
}

fn read_manifest(path: &PathBuf) -> Result<Manifest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
    Ok(serde_json::from_str(&text)?)
}

fn read_demos(path: &PathBuf) -> Result<Vec<kgpolicy::actions::LabeledDemoRecord>> {
    let file = fs::File::open(path).with_context(|| format!("reading {path:?}"))?;
    Ok(read_jsonl(BufReader::new(file))?)
}

fn load_hybrid(pruner: &Option<PathBuf>, rules: &Option<PathBuf>) -> Result<HybridPolicy> {
    let (Some(pruner), Some(rules)) = (pruner, rules) else {
        bail!("--policy hybrid requires --pruner and --rules");
    };
    Ok(HybridPolicy::new(
        PrunerModel::from_json(&fs::read_to_string(pruner)?)?,
        RuleBook::from_json(&fs::read_to_string(rules)?)?,
    ))
}

fn parse_float_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad number {s:?}")))
        .collect()
}

fn main() {
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenEnvs {
            difficulty,
            train,
            test,
            seed,
            out,
            dump_states,
        } => {
            let train_envs = generate_envs(difficulty, train, seed, "train-env")?;
            let test_envs = generate_envs(difficulty, test, seed, "test-env")?;
            let manifest = Manifest {
                difficulty,
                seed,
                train: train_envs.iter().map(|e| e.spec()).collect(),
                test: test_envs.iter().map(|e| e.spec()).collect(),
            };
            fs::write(&out, serde_json::to_string_pretty(&manifest)?)?;
            if let Some(dir) = dump_states {
                fs::create_dir_all(&dir)?;
                for env in train_envs.iter().chain(&test_envs) {
                    fs::write(dir.join(format!("{}.json", env.id())), env.dump_json())?;
                }
            }
            println!(
                "wrote manifest {} ({} train, {} test)",
                out.display(),
                train,
                test
            );
        }
        Command::TrainTeacher {
            difficulty,
            episodes,
            seed,
            train_envs,
            manifest,
            out,
        } => {
            let mut envs = match manifest {
                Some(path) => read_manifest(&path)?.envs(EnvSet::Train)?,
                None => generate_envs(difficulty, train_envs, seed, "train-env")?,
            };
            let policy = train_q(
                &mut envs,
                QHyper {
                    episodes,
                    ..QHyper::default()
                },
                seeds::derive(seed, "q", &[difficulty as u64]),
            )?;
            let final_score = policy
                .training_curve
                .last()
                .map(|p| p.mean_score)
                .unwrap_or(0.0);
            fs::write(&out, policy.to_json())?;
            println!(
                "trained teacher over {episodes} episodes, greedy train score {final_score:.3}, wrote {}",
                out.display()
            );
        }
        Command::CollectDemos {
            manifest,
            teacher,
            q_policy,
            epsilon,
            n,
            seed,
            out,
        } => {
            let m = read_manifest(&manifest)?;
            let mut envs = m.envs(EnvSet::Train)?;
            let dataset = match teacher {
                TeacherKind::Oracle => {
                    collect_demos(&mut OracleTeacher, &mut envs, epsilon, n, seed)?
                }
                TeacherKind::Random => collect_demos(
                    &mut RandomTeacher::new(seed),
                    &mut envs,
                    epsilon,
                    n,
                    seed,
                )?,
                TeacherKind::Q => {
                    let Some(path) = q_policy else {
                        bail!("--teacher q requires --q-policy");
                    };
                    let mut policy = QPolicy::from_json(&fs::read_to_string(path)?)?;
                    collect_demos(&mut policy, &mut envs, epsilon, n, seed)?
                }
            };
            let file = fs::File::create(&out)?;
            dataset.write_jsonl(std::io::BufWriter::new(file))?;
            let meta_path = out.with_extension("meta.json");
            fs::write(&meta_path, serde_json::to_string_pretty(&dataset.meta)?)?;
            println!(
                "collected {} records into {} (meta: {})",
                dataset.records.len(),
                out.display(),
                meta_path.display()
            );
        }
        Command::MineRules {
            demos,
            tau,
            global_freq,
            sweep,
            out,
        } => {
            let records = read_demos(&demos)?;
            if let Some(raw) = sweep {
                println!("tau sweep over {} records:", records.len());
                for t in parse_float_list(&raw)? {
                    let rb = mine_rules(&records, t, global_freq.into())?;
                    let counts: Vec<String> = rb
                        .types
                        .iter()
                        .map(|(ty, rules)| format!("{ty}:{}", rules.len()))
                        .collect();
                    println!("  tau={t}: {}", counts.join(" "));
                }
            }
            let rules = mine_rules(&records, tau, global_freq.into())?;
            fs::write(&out, rules.to_json())?;
            let total: usize = rules.types.values().map(Vec::len).sum();
            println!("mined {total} rules at tau={tau}, wrote {}", out.display());
        }
        Command::TrainPruner { demos, seed, out } => {
            let records = read_demos(&demos)?;
            let trained = train_pruner(&records, PrunerHyper::default(), seed)?;
            fs::write(&out, trained.model.to_json())?;
            println!(
                "trained pruner on {} records: final loss {:.4}, held-out accuracy {:.4}, wrote {}",
                records.len(),
                trained.final_loss,
                trained.holdout_accuracy,
                out.display()
            );
        }
        Command::Eval {
            manifest,
            set,
            policy,
            pruner,
            rules,
            q_policy,
            episodes,
            noise_add,
            noise_drop,
            seed,
            out,
        } => {
            let m = read_manifest(&manifest)?;
            let envs = m.envs(set)?;
            let all_envs: Vec<Env> = m
                .envs(EnvSet::Train)?
                .into_iter()
                .chain(m.envs(EnvSet::Test)?)
                .collect();
            let vocab = NoiseVocab::from_envs(&all_envs);
            let noise =
                (noise_add != 0.0 || noise_drop != 0.0).then_some((noise_add, noise_drop, &vocab));
            let stats = match policy {
                PolicyKind::Hybrid => {
                    let mut agent = HybridAgent(load_hybrid(&pruner, &rules)?);
                    evaluate(&mut agent, &envs, episodes, noise, seed)?
                }
                PolicyKind::Q => {
                    let Some(path) = q_policy else {
                        bail!("--policy q requires --q-policy");
                    };
                    let qp = QPolicy::from_json(&fs::read_to_string(path)?)?;
                    evaluate(&mut QAgent(&qp), &envs, episodes, noise, seed)?
                }
                PolicyKind::Random => {
                    evaluate(&mut RandomAgent::new(seed), &envs, episodes, noise, seed)?
                }
                PolicyKind::Oracle => evaluate(&mut OracleAgent, &envs, episodes, noise, seed)?,
            };
            println!(
                "mean normalized score {:.4} (env min {:.4}, max {:.4}, {} episodes)",
                stats.score, stats.min_env, stats.max_env, stats.episodes
            );
            if let Some(path) = out {
                fs::write(&path, serde_json::to_string_pretty(&stats)?)?;
            }
        }
        Command::Robustness {
            manifest,
            pruner,
            rules,
            q_policy,
            noise_add,
            noise_drop,
            episodes,
            seed,
            out,
        } => {
            let m = read_manifest(&manifest)?;
            let envs = m.envs(EnvSet::Train)?;
            let all_envs: Vec<Env> = m
                .envs(EnvSet::Train)?
                .into_iter()
                .chain(m.envs(EnvSet::Test)?)
                .collect();
            let vocab = NoiseVocab::from_envs(&all_envs);
            let hybrid = HybridPolicy::new(
                PrunerModel::from_json(&fs::read_to_string(&pruner)?)?,
                RuleBook::from_json(&fs::read_to_string(&rules)?)?,
            );
            let qp = QPolicy::from_json(&fs::read_to_string(&q_policy)?)?;
            let adds = parse_float_list(&noise_add)?;
            let drops = parse_float_list(&noise_drop)?;
            let mut grid = vec![(0.0, 0.0)];
            for &a in &adds {
                for &d in &drops {
                    grid.push((a, d));
                }
            }
            let mut rows: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
            println!("add    drop   q        hybrid");
            for (gi, (a, d)) in grid.iter().enumerate() {
                let noise = (*a != 0.0 || *d != 0.0).then_some((*a, *d, &vocab));
                let q_stats = evaluate(
                    &mut QAgent(&qp),
                    &envs,
                    episodes,
                    noise,
                    seeds::derive(seed, "robust-q", &[gi as u64]),
                )?;
                let h_stats = evaluate(
                    &mut HybridAgent(hybrid.clone()),
                    &envs,
                    episodes,
                    noise,
                    seeds::derive(seed, "robust-hybrid", &[gi as u64]),
                )?;
                println!(
                    "{:<6} {:<6} {:<8.4} {:<8.4}",
                    a, d, q_stats.score, h_stats.score
                );
                let mut cell = BTreeMap::new();
                cell.insert("q".to_string(), q_stats.score);
                cell.insert("hybrid".to_string(), h_stats.score);
                rows.insert(format!("add={a},drop={d}"), cell);
            }
            if let Some(path) = out {
                fs::write(&path, serde_json::to_string_pretty(&rows)?)?;
            }
        }
        Command::Explain {
            state,
            rules,
            pruner,
        } => {
            let text = fs::read_to_string(&state)?;
            // Accept either a full environment dump or a bare graph.
            let graph = match Env::load_json(&text) {
                Ok(env) => env.graph().clone(),
                Err(_) => KnowledgeGraph::from_json(&text)?,
            };
            let rules = RuleBook::from_json(&fs::read_to_string(&rules)?)?;
            let pruner = PrunerModel::from_json(&fs::read_to_string(&pruner)?)?;
            let policy = HybridPolicy::new(pruner, rules);
            let candidates = candidates_of(&graph);
            if candidates.is_empty() {
                bail!("state has no action candidates");
            }
            let (chosen, explanation) = policy.act(&graph, &candidates)?;
            println!(
                "predicted type: {} (distribution {:?})",
                explanation.predicted_type,
                explanation
                    .distribution
                    .iter()
                    .map(|p| (p * 1000.0).round() / 1000.0)
                    .collect::<Vec<_>>()
            );
            println!("chosen action: {chosen}\n");
            println!(
                "{:<32} {:<8} {:<6} {:<40} {}",
                "candidate", "type", "score", "matched edges", "missing edges"
            );
            for c in &candidates {
                let scored = score_action(&graph, c, &policy.rules)?;
                let matched: Vec<String> = scored
                    .checks
                    .iter()
                    .filter(|e| e.matched)
                    .map(|e| format!("{} (i={:.3})", e.pattern, e.importance))
                    .collect();
                let missing: Vec<String> = scored
                    .checks
                    .iter()
                    .filter(|e| !e.matched)
                    .map(|e| e.pattern.clone())
                    .collect();
                println!(
                    "{:<32} {:<8} {:<6} {:<40} {}",
                    scored.action,
                    scored.ty.name(),
                    scored.score,
                    matched.join("; "),
                    missing.join("; ")
                );
            }
        }
        Command::RunAll { config, out_dir } => {
            let config = match config {
                Some(path) => Config::parse(&fs::read_to_string(&path)?)?,
                None => Config::default(),
            };
            let started = std::time::Instant::now();
            let report = run_experiment(&config)?;
            write_report_files(&report, &out_dir)?;
            println!(
                "experiment finished in {:.1}s; wrote {}/report.json, tables.md, tables.csv",
                started.elapsed().as_secs_f64(),
                out_dir.display()
            );
            for (d, row) in &report.generalization {
                for (p, s) in row {
                    println!(
                        "difficulty {d} {p}: train {:.3} test {:.3}",
                        s.train, s.test
                    );
                }
            }
        }
    }
    Ok(())
}
