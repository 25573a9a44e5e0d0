//! Synthetic benchmarks: networks with planted confounders, sampling,
//! exact inference, and scoring against the planted truth.

mod bn;
mod causal;
pub mod fixtures;
mod harness;
pub mod infer;
mod inject;
mod metrics;

pub use bn::{BayesNetJson, DiscreteBayesNet};
pub use causal::{causal_model_to_bn, CausalModel};
pub use harness::{
    derive_seed, evaluate_once, format_table, run_benchmark, truth_cpdag, BenchRow,
    BenchmarkConfig, BenchmarkReport, FailedRun, RunOutcome,
};
pub use infer::mutual_information;
pub use inject::{inject_confounders, mi_thresholds, Injection, InjectionConfig, PlantedLatent};
pub use metrics::{compare_confounders, compare_cpdags, f1_score, ConfounderScore, CpdagScore};
