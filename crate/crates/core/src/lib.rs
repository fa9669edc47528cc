//! A two-step hybrid decision policy for cooking games whose states are
//! knowledge graphs and whose actions are templated text.
//!
//! The pipeline: a scripted or learned teacher produces demonstrations;
//! actions are parsed into typed templates with slot bindings; a
//! renaming-invariant softmax classifier (the pruner) learns to map a
//! state graph to an action type; a tf-idf-style miner extracts abstract
//! supporting edges per type; at decision time the pruner picks the type
//! and the rule selector scores candidates by how many of their
//! instantiated supporting edges are present in the graph.

pub mod actions;
pub mod cookworld;
pub mod error;
pub mod harness;
pub mod kg;
pub mod miner;
pub mod policy;
pub mod pruner;
pub mod seeds;
pub mod teacher;
pub mod vocab;

pub use error::{Error, Result};
pub use kg::{AbstractEdge, Bindings, KnowledgeGraph, MatchPattern, Position, Triple};
