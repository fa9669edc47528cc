//! The full pipeline: generate environments, train teachers, collect
//! demonstrations, mine rules, train the pruner, and evaluate every
//! policy on the generalization and robustness grids plus ablations.
//! Everything is derived from the master seed; two runs with the same
//! config produce byte-identical reports.

use std::collections::BTreeMap;

use super::baselines::{train_network_selector, NetworkPolicy, SelectorHyper};
use super::config::Config;
use super::eval::{evaluate, CellStats, HybridAgent, QAgent};
use super::noise::NoiseVocab;
use super::report::{
    PrunerStats, Report, RobustCell, RobustStats, RuleSummary, ScorePair, StepTrace, TopRule,
    VocabEcho,
};
use crate::actions::TeacherTag;
use crate::cookworld::{Env, EnvSpec};
use crate::error::Result;
use crate::miner::{mine_rules, GlobalFreqMode, RuleBook};
use crate::policy::HybridPolicy;
use crate::pruner::{train_pruner, PrunerHyper, TrainedPruner};
use crate::seeds;
use crate::teacher::{
    collect_demos, train_q, DemoDataset, OracleTeacher, QHyper, RandomTeacher,
    TeacherPolicy,
};

/// Generate an environment set for one difficulty.
pub fn generate_envs(difficulty: u8, count: usize, master_seed: u64, tag: &str) -> Result<Vec<Env>> {
    (0..count)
        .map(|i| {
            Env::generate(EnvSpec {
                difficulty,
                seed: seeds::derive(master_seed, tag, &[difficulty as u64, i as u64]),
            })
        })
        .collect()
}

/// Everything trained for one difficulty with one teacher.
pub struct TrainedPipeline {
    pub rules: RuleBook,
    pub pruner: TrainedPruner,
    pub policy: HybridPolicy,
    pub demos: DemoDataset,
}

/// Collect demonstrations from a teacher and fit both hybrid components.
pub fn build_pipeline(
    teacher: &mut dyn TeacherPolicy,
    train_envs: &[Env],
    config: &Config,
    difficulty: u8,
) -> Result<TrainedPipeline> {
    let tag = teacher.tag();
    let mut envs: Vec<Env> = train_envs.to_vec();
    let demos = collect_demos(
        teacher,
        &mut envs,
        config.epsilon,
        config.demos_per_difficulty,
        seeds::derive(
            config.master_seed,
            "demos",
            &[difficulty as u64, tag as u64],
        ),
    )?;
    let rules = mine_rules(&demos.records, config.tau, GlobalFreqMode::OwnBindings)?;
    let pruner = train_pruner(
        &demos.records,
        PrunerHyper::default(),
        seeds::derive(
            config.master_seed,
            "pruner",
            &[difficulty as u64, tag as u64],
        ),
    )?;
    let policy = HybridPolicy::new(pruner.model.clone(), rules.clone());
    Ok(TrainedPipeline {
        rules,
        pruner,
        policy,
        demos,
    })
}

fn rule_summary(rules: &RuleBook) -> RuleSummary {
    let mut rules_per_type = BTreeMap::new();
    let mut top_rules = BTreeMap::new();
    for (ty, list) in &rules.types {
        rules_per_type.insert(ty.clone(), list.len());
        top_rules.insert(
            ty.clone(),
            list.iter()
                .take(5)
                .map(|r| TopRule {
                    edge: r.edge.to_string(),
                    importance: r.importance,
                })
                .collect(),
        );
    }
    RuleSummary {
        rules_per_type,
        top_rules,
        warnings: rules.meta.warnings.clone(),
    }
}

fn trace_episode(policy: &HybridPolicy, env: &Env) -> Result<Vec<StepTrace>> {
    let mut env = env.clone();
    env.reset();
    let mut out = Vec::new();
    loop {
        let cands = env.action_candidates();
        if cands.is_empty() {
            break;
        }
        let (action, ex) = policy.act(env.graph(), &cands)?;
        let chosen = ex
            .candidates
            .iter()
            .find(|c| c.action == action)
            .expect("chosen candidate is scored");
        out.push(StepTrace {
            action: action.clone(),
            used_type: ex.used_type.name().to_string(),
            score: chosen.score,
            matched_edges: chosen
                .checks
                .iter()
                .filter(|c| c.matched)
                .map(|c| c.pattern.clone())
                .collect(),
            missing_edges: chosen
                .checks
                .iter()
                .filter(|c| !c.matched)
                .map(|c| c.pattern.clone())
                .collect(),
        });
        let (_, done) = env.step(&action)?;
        if done {
            break;
        }
    }
    Ok(out)
}

fn rel_change(clean: f64, noisy: f64) -> Option<f64> {
    (clean != 0.0).then(|| (noisy - clean) / clean)
}

/// Run the whole experiment described by the config.
pub fn run_experiment(config: &Config) -> Result<Report> {
    config.validate()?;
    let master = config.master_seed;
    let mut report = Report {
        config: config.clone(),
        vocab: BTreeMap::new(),
        generalization: BTreeMap::new(),
        robustness: BTreeMap::new(),
        teacher_ablation: BTreeMap::new(),
        selector_ablation: BTreeMap::new(),
        pruner: BTreeMap::new(),
        rulebooks: BTreeMap::new(),
        traces: BTreeMap::new(),
    };

    for &difficulty in &config.difficulties {
        let key = difficulty.to_string();
        let train_envs = generate_envs(difficulty, config.train_envs, master, "train-env")?;
        let test_envs = generate_envs(difficulty, config.test_envs, master, "test-env")?;
        let vocab = NoiseVocab::from_envs(train_envs.iter().chain(&test_envs));
        report.vocab.insert(
            key.clone(),
            VocabEcho {
                n_tokens: vocab.tokens.len(),
                relations: vocab.relations.clone(),
            },
        );

        let mut q_envs = train_envs.to_vec();
        let q_policy = train_q(
            &mut q_envs,
            QHyper {
                episodes: config.q_episodes_for(difficulty),
                ..QHyper::default()
            },
            seeds::derive(master, "q", &[difficulty as u64]),
        )?;

        let pipeline = build_pipeline(&mut OracleTeacher, &train_envs, config, difficulty)?;
        report.pruner.insert(
            key.clone(),
            PrunerStats {
                holdout_accuracy: pipeline.pruner.holdout_accuracy,
                final_loss: pipeline.pruner.final_loss,
            },
        );
        report.rulebooks.insert(key.clone(), rule_summary(&pipeline.rules));
        report
            .traces
            .insert(key.clone(), trace_episode(&pipeline.policy, &test_envs[0])?);

        // Generalization: clean evaluation on train and test sets.
        let mut gen_row = BTreeMap::new();
        let eval_seed = |tag: &str, part: u64| seeds::derive(master, tag, &[difficulty as u64, part]);
        let mut hybrid_agent = HybridAgent(pipeline.policy.clone());
        gen_row.insert(
            "hybrid".to_string(),
            ScorePair {
                train: evaluate(
                    &mut hybrid_agent,
                    &train_envs,
                    config.episodes_per_cell,
                    None,
                    eval_seed("gen-hybrid", 0),
                )?
                .score,
                test: evaluate(
                    &mut hybrid_agent,
                    &test_envs,
                    config.episodes_per_cell,
                    None,
                    eval_seed("gen-hybrid", 1),
                )?
                .score,
            },
        );
        gen_row.insert(
            "q".to_string(),
            ScorePair {
                train: evaluate(
                    &mut QAgent(&q_policy),
                    &train_envs,
                    config.episodes_per_cell,
                    None,
                    eval_seed("gen-q", 0),
                )?
                .score,
                test: evaluate(
                    &mut QAgent(&q_policy),
                    &test_envs,
                    config.episodes_per_cell,
                    None,
                    eval_seed("gen-q", 1),
                )?
                .score,
            },
        );
        report.generalization.insert(key.clone(), gen_row);

        // Robustness grid on training environments; the clean (0, 0)
        // cell comes first and anchors relative changes.
        let mut grid: Vec<(f64, f64)> = vec![(0.0, 0.0)];
        for &add in &config.noise_add {
            for &drop in &config.noise_drop {
                grid.push((add, drop));
            }
        }
        let mut cells: Vec<RobustCell> = Vec::with_capacity(grid.len());
        let mut clean: BTreeMap<String, f64> = BTreeMap::new();
        for (gi, &(add, drop)) in grid.iter().enumerate() {
            let noise = (add != 0.0 || drop != 0.0).then_some((add, drop, &vocab));
            let mut policies: BTreeMap<String, RobustStats> = BTreeMap::new();
            let stats_for = |agent: &mut dyn super::eval::Agent,
                             seed: u64|
             -> Result<CellStats> {
                evaluate(agent, &train_envs, config.episodes_per_cell, noise, seed)
            };
            let hybrid_stats = stats_for(
                &mut hybrid_agent,
                eval_seed("robust-hybrid", gi as u64),
            )?;
            let q_stats = stats_for(&mut QAgent(&q_policy), eval_seed("robust-q", gi as u64))?;
            for (name, stats) in [("hybrid", hybrid_stats), ("q", q_stats)] {
                let rel = if gi == 0 {
                    clean.insert(name.to_string(), stats.score);
                    Some(0.0)
                } else {
                    rel_change(clean[name], stats.score)
                };
                policies.insert(
                    name.to_string(),
                    RobustStats {
                        stats,
                        rel_change: rel,
                    },
                );
            }
            cells.push(RobustCell {
                add,
                drop,
                policies,
            });
        }
        report.robustness.insert(key.clone(), cells);

        // Ablations on the first difficulty only.
        if config.ablations && difficulty == config.difficulties[0] {
            let mut teachers: Vec<(&str, Box<dyn TeacherPolicy>)> = vec![
                ("oracle", Box::new(OracleTeacher)),
                ("q", Box::new(q_policy.clone())),
                (
                    "random",
                    Box::new(RandomTeacher::new(seeds::derive(
                        master,
                        "ablation-random",
                        &[difficulty as u64],
                    ))),
                ),
            ];
            for (name, teacher) in teachers.iter_mut() {
                let pipe = if teacher.tag() == TeacherTag::Oracle {
                    // Same demos as the main pipeline.
                    build_pipeline(&mut OracleTeacher, &train_envs, config, difficulty)?
                } else {
                    build_pipeline(teacher.as_mut(), &train_envs, config, difficulty)?
                };
                let mut agent = HybridAgent(pipe.policy);
                report.teacher_ablation.insert(
                    name.to_string(),
                    ScorePair {
                        train: evaluate(
                            &mut agent,
                            &train_envs,
                            config.episodes_per_cell,
                            None,
                            eval_seed("ablation-teacher", 0),
                        )?
                        .score,
                        test: evaluate(
                            &mut agent,
                            &test_envs,
                            config.episodes_per_cell,
                            None,
                            eval_seed("ablation-teacher", 1),
                        )?
                        .score,
                    },
                );
            }

            let selector = train_network_selector(
                &pipeline.demos.records,
                SelectorHyper::default(),
                seeds::derive(master, "selector", &[difficulty as u64]),
            )?;
            let mut network_agent = NetworkPolicy {
                pruner: pipeline.pruner.model.clone(),
                selector,
            };
            report.selector_ablation.insert(
                "rule-selector".to_string(),
                report.generalization[&key]["hybrid"].clone(),
            );
            report.selector_ablation.insert(
                "network-selector".to_string(),
                ScorePair {
                    train: evaluate(
                        &mut network_agent,
                        &train_envs,
                        config.episodes_per_cell,
                        None,
                        eval_seed("ablation-selector", 0),
                    )?
                    .score,
                    test: evaluate(
                        &mut network_agent,
                        &test_envs,
                        config.episodes_per_cell,
                        None,
                        eval_seed("ablation-selector", 1),
                    )?
                    .score,
                },
            );
        }
    }
    Ok(report)
}

/// Write report.json, tables.md, and tables.csv into a directory.
pub fn write_report_files(report: &Report, dir: &std::path::Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), report.to_json())?;
    std::fs::write(dir.join("tables.md"), report.to_markdown())?;
    std::fs::write(dir.join("tables.csv"), report.to_csv())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A config small enough for unit testing; full-scale runs live in
    /// the acceptance suite.
    pub(crate) fn tiny_config() -> Config {
        Config {
            difficulties: vec![1],
            train_envs: 4,
            test_envs: 2,
            episodes_per_cell: 5,
            demos_per_difficulty: 600,
            epsilon: 0.2,
            tau: 0.3,
            master_seed: 5,
            noise_add: vec![0.2],
            noise_drop: vec![0.0],
            q_episodes: vec![60, 60, 60, 60],
            ablations: false,
        }
    }

    #[test]
    fn pipeline_produces_a_complete_report() {
        let report = run_experiment(&tiny_config()).unwrap();
        assert!(report.generalization.contains_key("1"));
        let row = &report.generalization["1"];
        assert!(row.contains_key("hybrid") && row.contains_key("q"));
        let cells = &report.robustness["1"];
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[0].add, 0.0);
        assert_eq!(cells[0].policies["hybrid"].rel_change, Some(0.0));
        assert!(!report.traces["1"].is_empty());
        assert!(report.pruner["1"].holdout_accuracy > 0.5);
        // Markdown and CSV render without panicking and mention tables.
        assert!(report.to_markdown().contains("Generalization"));
        assert!(report.to_csv().starts_with("table,"));
    }

    #[test]
    fn reports_are_byte_identical_across_runs() {
        let a = run_experiment(&tiny_config()).unwrap();
        let b = run_experiment(&tiny_config()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }
}
