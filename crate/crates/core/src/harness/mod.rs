//! Experiment harness: noise injection, evaluation, baselines, config,
//! reporting, and the end-to-end pipeline.

pub mod baselines;
pub mod config;
pub mod eval;
pub mod experiment;
pub mod noise;
pub mod report;

pub use baselines::{train_network_selector, NetworkPolicy, NetworkSelector, SelectorHyper};
pub use config::Config;
pub use eval::{evaluate, Agent, CellStats, HybridAgent, OracleAgent, QAgent, RandomAgent};
pub use experiment::{build_pipeline, generate_envs, run_experiment, write_report_files};
pub use noise::{perturb, NoiseSpec, NoiseVocab};
pub use report::Report;
