use rayon::prelude::*;

use super::{mask_to_vec, LearnerConfig, LocalScoreTable, EXACT_MAX_NODES};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graphs::Dag;
use crate::scoring::ScoreContext;

/// Drops bit `v` from a mask over all nodes, shifting higher bits down.
fn squeeze(m: u32, v: usize) -> usize {
    let low = m & ((1u32 << v) - 1);
    let high = (m >> (v + 1)) << v;
    (low | high) as usize
}

fn expand(m: usize, v: usize) -> u32 {
    let m = m as u32;
    let low = m & ((1u32 << v) - 1);
    let high = (m >> v) << (v + 1);
    low | high
}

/// `bps[S]`: best local score of `v` with parents drawn from `S`, for every
/// subset `S` of the other nodes (indexed in squeezed form).
fn best_parent_scores(table: &LocalScoreTable, v: usize) -> Vec<f64> {
    let n = table.n_nodes();
    let size = 1usize << (n - 1);
    let mut bps = vec![f64::NEG_INFINITY; size];
    for s in 0..size {
        if let Some(score) = table.by_mask(v, expand(s, v)) {
            bps[s] = score;
        }
        let mut rest = s;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            rest ^= bit;
            let sub = bps[s ^ bit];
            if sub > bps[s] {
                bps[s] = sub;
            }
        }
    }
    bps
}

fn best_parents_within(table: &LocalScoreTable, v: usize, allowed: u32) -> u32 {
    let mut best = (f64::NEG_INFINITY, u32::MAX);
    for (m, s) in table.entries(v) {
        if m & !allowed == 0 && (s > best.0 || (s == best.0 && m < best.1)) {
            best = (s, m);
        }
    }
    best.1
}

/// Exact maximizer of the decomposable BIC among DAGs whose in-degree is at
/// most `cfg.max_parents`.
pub fn learn_exact(d: &Dataset, cfg: &LearnerConfig) -> Result<Dag> {
    let ctx = ScoreContext::new(d)?;
    learn_exact_with(&ctx, cfg)
}

pub(crate) fn learn_exact_with(ctx: &ScoreContext, cfg: &LearnerConfig) -> Result<Dag> {
    cfg.validate()?;
    let n = ctx.n_variables();
    if n > EXACT_MAX_NODES {
        return Err(Error::TooManyVariables(n, EXACT_MAX_NODES));
    }
    if n == 0 {
        return Ok(Dag::new(0));
    }
    let table = LocalScoreTable::compute(ctx, cfg.max_parents)?;
    let bps: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|v| best_parent_scores(&table, v))
        .collect();

    let full = (1usize << n) - 1;
    let mut best = vec![f64::NEG_INFINITY; full + 1];
    let mut sink = vec![0u8; full + 1];
    best[0] = 0.0;
    for s in 1..=full {
        let mut rest = s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let pred = s ^ (1 << v);
            let cand = best[pred] + bps[v][squeeze(pred as u32, v)];
            if cand > best[s] {
                best[s] = cand;
                sink[s] = v as u8;
            }
        }
    }

    let mut parents = vec![Vec::new(); n];
    let mut s = full;
    while s != 0 {
        let v = sink[s] as usize;
        s ^= 1 << v;
        parents[v] = mask_to_vec(best_parents_within(&table, v, s as u32));
    }
    Dag::from_parents(&parents)
}
