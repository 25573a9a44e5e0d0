//! Causal Bayesian network learning from discrete data, with recovery of
//! latent confounders from the triangles they leave in a learnt DAG.
//!
//! The guide in `book/` walks through the pipeline; its code blocks run as
//! doc-tests of this crate.

pub mod bench;
pub mod ci;
pub mod confounder;
pub mod data;
pub mod error;
pub mod graphs;
pub mod learner;
pub mod scoring;

pub use ci::{find_separator, SeparatorQuery, SeparatorResult};
pub use confounder::{run_algorithm1, AugmentedResult, Discovery, Triangle, Verdict};
pub use data::{ContingencyTable, Dataset, VariableMeta};
pub use error::{Error, Result};
pub use graphs::{cpdag_of, d_separated, markov_equivalent, Dag, Pdag};
pub use learner::{learn, LearnerConfig, LearnerMode};
pub use scoring::{chi2_critical, ScoreContext};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/scoring.md")]
    mod scoring {}
    #[doc = include_str!("../../../book/src/separators.md")]
    mod separators {}
    #[doc = include_str!("../../../book/src/learning.md")]
    mod learning {}
    #[doc = include_str!("../../../book/src/confounders.md")]
    mod confounders {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
