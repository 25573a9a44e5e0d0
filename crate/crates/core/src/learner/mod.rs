//! Score-based DAG learning: exact search over node subsets for small
//! networks, greedy hill climbing with restarts otherwise.

mod exact;
mod hill;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use exact::learn_exact;
pub use hill::learn_hill_climb;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graphs::Dag;
use crate::scoring::ScoreContext;

/// Largest network the exact learner accepts.
pub const EXACT_MAX_NODES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerMode {
    Exact,
    HillClimb,
    /// Exact up to `auto_threshold` nodes, hill climbing above.
    Auto,
}

impl std::str::FromStr for LearnerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(LearnerMode::Exact),
            "hc" | "hill_climb" | "hill-climb" => Ok(LearnerMode::HillClimb),
            "auto" => Ok(LearnerMode::Auto),
            _ => Err(Error::InvalidArgument(format!("unknown learner mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub max_parents: usize,
    pub mode: LearnerMode,
    pub restarts: usize,
    pub seed: u64,
    pub auto_threshold: usize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            max_parents: 4,
            mode: LearnerMode::Auto,
            restarts: 1,
            seed: 0,
            auto_threshold: EXACT_MAX_NODES,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_parents == 0 {
            return Err(Error::InvalidArgument("max_parents must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Local BIC scores of every parent set of size at most `max_parents`, per
/// node. Parent sets are bitmasks over node ids.
#[derive(Debug, Clone)]
pub struct LocalScoreTable {
    n: usize,
    max_parents: usize,
    scores: Vec<HashMap<u32, f64>>,
}

impl LocalScoreTable {
    pub fn compute(ctx: &ScoreContext, max_parents: usize) -> Result<Self> {
        let n = ctx.n_variables();
        if n > 32 {
            return Err(Error::TooManyVariables(n, 32));
        }
        let k = max_parents.min(n.saturating_sub(1));
        let jobs: Vec<(usize, u32)> = (0..n)
            .flat_map(|v| {
                subsets_up_to(n, k)
                    .into_iter()
                    .filter(move |m| m & (1 << v) == 0)
                    .map(move |m| (v, m))
            })
            .collect();
        let scored = jobs
            .par_iter()
            .map(|&(v, m)| ctx.bic(v, &mask_to_vec(m)).map(|s| (v, m, s)))
            .collect::<Result<Vec<_>>>()?;
        let mut scores = vec![HashMap::new(); n];
        for (v, m, s) in scored {
            scores[v].insert(m, s);
        }
        Ok(LocalScoreTable {
            n,
            max_parents: k,
            scores,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn max_parents(&self) -> usize {
        self.max_parents
    }

    pub fn get(&self, v: usize, parents: &[usize]) -> Option<f64> {
        let m = parents.iter().fold(0u32, |m, &p| m | (1 << p));
        self.scores.get(v)?.get(&m).copied()
    }

    pub(crate) fn by_mask(&self, v: usize, m: u32) -> Option<f64> {
        self.scores[v].get(&m).copied()
    }

    pub(crate) fn entries(&self, v: usize) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.scores[v].iter().map(|(&m, &s)| (m, s))
    }

    pub fn len(&self) -> usize {
        self.scores.iter().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// All subsets of `0..n` with at most `k` elements, in increasing size.
fn subsets_up_to(n: usize, k: usize) -> Vec<u32> {
    let mut out = vec![0u32];
    let mut frontier = vec![0u32];
    for _ in 0..k {
        let mut next = Vec::new();
        for &m in &frontier {
            let start = if m == 0 { 0 } else { 32 - m.leading_zeros() as usize };
            for x in start..n {
                next.push(m | (1 << x));
            }
        }
        out.extend(&next);
        frontier = next;
    }
    out
}

pub(crate) fn mask_to_vec(m: u32) -> Vec<usize> {
    (0..32).filter(|&i| m & (1 << i) != 0).collect()
}

/// Learns a DAG with the configured mode.
pub fn learn(d: &Dataset, cfg: &LearnerConfig) -> Result<Dag> {
    let ctx = ScoreContext::new(d)?;
    learn_with(&ctx, cfg)
}

/// Same as [`learn`], reusing an existing score context.
pub fn learn_with(ctx: &ScoreContext, cfg: &LearnerConfig) -> Result<Dag> {
    cfg.validate()?;
    let exact = match cfg.mode {
        LearnerMode::Exact => true,
        LearnerMode::HillClimb => false,
        LearnerMode::Auto => ctx.n_variables() <= cfg.auto_threshold.min(EXACT_MAX_NODES),
    };
    if exact {
        exact::learn_exact_with(ctx, cfg)
    } else {
        hill::learn_hill_climb_with(ctx, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::VariableMeta;
    use crate::graphs::markov_equivalent;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(n_rows: usize, seed: u64, draw: impl Fn(&mut ChaCha8Rng) -> Vec<u16>) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<u16>> = (0..n_rows).map(|_| draw(&mut rng)).collect();
        let n = rows[0].len();
        let cols = (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        let vars = (0..n)
            .map(|j| VariableMeta::with_cardinality(format!("X{j}"), 2))
            .collect();
        Dataset::new(vars, cols).unwrap()
    }

    fn bit(rng: &mut ChaCha8Rng, p: f64) -> u16 {
        u16::from(rng.gen::<f64>() < p)
    }

    fn exact() -> LearnerConfig {
        LearnerConfig {
            mode: LearnerMode::Exact,
            ..LearnerConfig::default()
        }
    }

    fn hill() -> LearnerConfig {
        LearnerConfig {
            mode: LearnerMode::HillClimb,
            restarts: 3,
            seed: 11,
            ..LearnerConfig::default()
        }
    }

    #[test]
    fn independent_pair_gives_empty_graph() {
        let d = sample(10_000, 1, |r| vec![bit(r, 0.5), bit(r, 0.3)]);
        assert_eq!(learn(&d, &exact()).unwrap().n_arcs(), 0);
        assert_eq!(learn(&d, &hill()).unwrap().n_arcs(), 0);
    }

    #[test]
    fn collider_is_recovered() {
        // X0 -> X2 <- X1
        let d = sample(10_000, 2, |r| {
            let (a, b) = (bit(r, 0.5), bit(r, 0.4));
            let p = [0.1, 0.6, 0.7, 0.95][(2 * a + b) as usize];
            vec![a, b, bit(r, p)]
        });
        let truth = Dag::from_arcs(3, &[(0, 2), (1, 2)]).unwrap();
        let g = learn(&d, &exact()).unwrap();
        assert!(markov_equivalent(&g, &truth).unwrap());
    }

    #[test]
    fn chain_class_from_both_learners() {
        // X0 -> X1 -> X2
        let d = sample(10_000, 3, |r| {
            let a = bit(r, 0.5);
            let b = bit(r, if a == 1 { 0.85 } else { 0.2 });
            let c = bit(r, if b == 1 { 0.8 } else { 0.1 });
            vec![a, b, c]
        });
        let truth = Dag::from_arcs(3, &[(0, 1), (1, 2)]).unwrap();
        let ge = learn(&d, &exact()).unwrap();
        let gh = learn(&d, &hill()).unwrap();
        assert!(markov_equivalent(&ge, &truth).unwrap());
        assert!(markov_equivalent(&gh, &truth).unwrap());
    }

    #[test]
    fn hill_climb_never_beats_exact() {
        for seed in 0..4 {
            let d = sample(2_000, 100 + seed, |r| {
                let a = bit(r, 0.5);
                let b = bit(r, if a == 1 { 0.7 } else { 0.3 });
                let c = bit(r, [0.1, 0.5, 0.6, 0.9][(2 * a + b) as usize]);
                let e = bit(r, if c == 1 { 0.75 } else { 0.35 });
                let f = bit(r, 0.5);
                let g = bit(r, if f == e { 0.8 } else { 0.2 });
                vec![a, b, c, e, f, g]
            });
            let ctx = ScoreContext::new(&d).unwrap();
            let se = ctx.dag_score(&learn_with(&ctx, &exact()).unwrap()).unwrap();
            let sh = ctx.dag_score(&learn_with(&ctx, &hill()).unwrap()).unwrap();
            assert!(sh <= se + 1e-9, "{sh} > {se}");
        }
    }

    #[test]
    fn parent_limit_respected() {
        let d = sample(3_000, 5, |r| {
            let xs: Vec<u16> = (0..4).map(|_| bit(r, 0.5)).collect();
            let s = xs.iter().sum::<u16>() as usize;
            let y = bit(r, [0.05, 0.3, 0.5, 0.7, 0.95][s]);
            xs.into_iter().chain([y]).collect()
        });
        for mode in [LearnerMode::Exact, LearnerMode::HillClimb] {
            let cfg = LearnerConfig {
                max_parents: 2,
                mode,
                ..LearnerConfig::default()
            };
            let g = learn(&d, &cfg).unwrap();
            assert!((0..5).all(|v| g.parents(v).len() <= 2));
        }
    }

    #[test]
    fn local_table_matches_context() {
        let d = sample(500, 6, |r| vec![bit(r, 0.5), bit(r, 0.2), bit(r, 0.7)]);
        let ctx = ScoreContext::new(&d).unwrap();
        let t = LocalScoreTable::compute(&ctx, 2).unwrap();
        // per node: {}, two singletons, one pair
        assert_eq!(t.len(), 12);
        assert_eq!(t.get(2, &[0, 1]), Some(ctx.bic(2, &[0, 1]).unwrap()));
        assert_eq!(t.get(2, &[2]), None);
    }

    #[test]
    fn exact_rejects_large_networks() {
        let d = sample(10, 7, |r| (0..21).map(|_| bit(r, 0.5)).collect());
        assert!(matches!(
            learn(&d, &exact()),
            Err(Error::TooManyVariables(21, EXACT_MAX_NODES))
        ));
    }

    #[test]
    fn subset_enumeration_counts() {
        // 1 + 5 + 10 + 10
        assert_eq!(subsets_up_to(5, 3).len(), 26);
        assert_eq!(subsets_up_to(4, 4).len(), 16);
        let mut all = subsets_up_to(6, 6);
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 64);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("exact".parse::<LearnerMode>().unwrap(), LearnerMode::Exact);
        assert_eq!("hc".parse::<LearnerMode>().unwrap(), LearnerMode::HillClimb);
        assert!("greedy".parse::<LearnerMode>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = LearnerConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.max_parents = 0;
        assert!(cfg.validate().is_err());
        cfg.max_parents = 2;
        cfg.restarts = 0;
        assert!(cfg.validate().is_err());
    }
}
