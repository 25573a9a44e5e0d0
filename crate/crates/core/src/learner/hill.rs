use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LearnerConfig;
use crate::data::Dataset;
use crate::error::Result;
use crate::graphs::Dag;
use crate::scoring::ScoreContext;

const MIN_GAIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum OpKind {
    Add,
    Remove,
    Reverse,
}

/// `toggle[v][u]`: score change of `v`'s family when `u` is added to or
/// removed from its parent set; `-inf` when adding would break the limit.
struct DeltaCache {
    toggle: Vec<Vec<f64>>,
}

impl DeltaCache {
    fn new(n: usize) -> Self {
        DeltaCache {
            toggle: vec![vec![f64::NEG_INFINITY; n]; n],
        }
    }

    fn refresh(&mut self, ctx: &ScoreContext, g: &Dag, v: usize, k: usize) -> Result<()> {
        let pa: Vec<usize> = g.parents(v).iter().copied().collect();
        let base = ctx.bic(v, &pa)?;
        for u in 0..g.n_nodes() {
            self.toggle[v][u] = if u == v {
                f64::NEG_INFINITY
            } else if g.has_arc(u, v) {
                let without: Vec<usize> = pa.iter().copied().filter(|&p| p != u).collect();
                ctx.bic(v, &without)? - base
            } else if pa.len() < k {
                let mut with = pa.clone();
                with.push(u);
                ctx.bic(v, &with)? - base
            } else {
                f64::NEG_INFINITY
            };
        }
        Ok(())
    }
}

fn reversal_creates_cycle(g: &Dag, u: usize, v: usize) -> bool {
    // u -> v becomes v -> u; a cycle appears iff another path u ~> v exists
    g.children(u).iter().any(|&c| c != v && g.has_path(c, v))
}

fn climb(ctx: &ScoreContext, mut g: Dag, k: usize) -> Result<Dag> {
    let n = g.n_nodes();
    let mut cache = DeltaCache::new(n);
    for v in 0..n {
        cache.refresh(ctx, &g, v, k)?;
    }
    loop {
        let mut best: Option<(f64, OpKind, usize, usize)> = None;
        let mut consider = |gain: f64, op: OpKind, u: usize, v: usize| {
            if gain > MIN_GAIN && best.is_none_or(|b| gain > b.0) {
                best = Some((gain, op, u, v));
            }
        };
        // visiting (kind, u, v) lexicographically keeps the first of equal gains
        for u in 0..n {
            for v in 0..n {
                if g.can_add_arc(u, v) {
                    consider(cache.toggle[v][u], OpKind::Add, u, v);
                }
            }
        }
        for u in 0..n {
            for v in 0..n {
                if g.has_arc(u, v) {
                    consider(cache.toggle[v][u], OpKind::Remove, u, v);
                }
            }
        }
        for u in 0..n {
            for v in 0..n {
                if g.has_arc(u, v) && !reversal_creates_cycle(&g, u, v) {
                    consider(cache.toggle[v][u] + cache.toggle[u][v], OpKind::Reverse, u, v);
                }
            }
        }
        let Some((_, op, u, v)) = best else {
            return Ok(g);
        };
        match op {
            OpKind::Add => g.add_arc(u, v)?,
            OpKind::Remove => g.remove_arc(u, v)?,
            OpKind::Reverse => g.reverse_arc(u, v)?,
        }
        cache.refresh(ctx, &g, v, k)?;
        if op == OpKind::Reverse {
            cache.refresh(ctx, &g, u, k)?;
        }
    }
}

/// Random DAG respecting the parent limit: arcs follow a random order.
fn random_start(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Result<Dag> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let p = (2.0 / n.max(2) as f64).min(0.5);
    let mut g = Dag::new(n);
    for j in 1..n {
        for i in 0..j {
            let (u, v) = (order[i], order[j]);
            if g.parents(v).len() < k && rng.gen::<f64>() < p {
                g.add_arc(u, v)?;
            }
        }
    }
    Ok(g)
}

/// Best-improvement hill climbing over arc additions, removals and reversals.
/// The first climb starts from the empty graph, later ones from random DAGs
/// drawn from `cfg.seed`; the best-scoring result is kept.
pub fn learn_hill_climb(d: &Dataset, cfg: &LearnerConfig) -> Result<Dag> {
    let ctx = ScoreContext::new(d)?;
    learn_hill_climb_with(&ctx, cfg)
}

pub(crate) fn learn_hill_climb_with(ctx: &ScoreContext, cfg: &LearnerConfig) -> Result<Dag> {
    cfg.validate()?;
    let n = ctx.n_variables();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(f64, Dag)> = None;
    for r in 0..cfg.restarts {
        let start = if r == 0 {
            Dag::new(n)
        } else {
            random_start(n, cfg.max_parents, &mut rng)?
        };
        let g = climb(ctx, start, cfg.max_parents)?;
        let s = ctx.dag_score(&g)?;
        if best.as_ref().is_none_or(|b| s > b.0) {
            best = Some((s, g));
        }
    }
    Ok(best.expect("at least one restart").1)
}
