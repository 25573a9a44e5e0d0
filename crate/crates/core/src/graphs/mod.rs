//! DAGs, CPDAGs and d-separation.

mod dag;
pub mod dsep;
mod pdag;

pub use dag::{markov_equivalent, Dag, DagJson};
pub use dsep::{d_separated, d_separated_by_trails, simple_trails, Blocker, Trail};
pub use pdag::{cpdag_of, cpdag_with_names, LatentJson, LatentNode, Pdag, PdagJson};
