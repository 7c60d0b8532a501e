//! A multi-modality logical-reasoning toolkit built around a deterministic
//! symbolic core: first-order theories are grounded to propositional form and
//! decided three-valuedly by a pruned truth table, model-generated rationales
//! are tag-checked and reward-filtered into per-round training datasets, and
//! a voting inference layer plus an evaluation battery (accuracy, pass@k,
//! budgeted sampling curves, coverage/overlap, error taxonomy) measure the
//! result.

pub mod artifact;
pub mod data;
pub mod entail;
pub mod error_analysis;
pub mod eval;
pub mod llm;
pub mod logic;
pub mod pipeline;
pub mod rationale;
pub mod rng;
pub mod testkit;
pub mod types;

pub use types::{Answer, Modality};

/// Tool version stamped into artifact headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Global seed default used across the toolkit for reproducibility.
pub const DEFAULT_SEED: u64 = 42;
