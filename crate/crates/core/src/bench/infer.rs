//! Exact marginals by variable elimination and (conditional) mutual information.

use std::collections::BTreeSet;

use super::DiscreteBayesNet;
use crate::error::Result;

/// Largest intermediate factor the exact path will build.
pub const EXACT_STATE_LIMIT: usize = 10_000_000;
/// Rows drawn when the exact path is too large.
pub const FALLBACK_SAMPLE_ROWS: usize = 100_000;

/// A table over `vars` (sorted ids), the last variable varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub vars: Vec<usize>,
    pub cards: Vec<usize>,
    pub values: Vec<f64>,
}

/// Visits every assignment of `cards` in row-major order, passing the flat
/// offset into each of the `strides` tables.
fn for_each_assignment(cards: &[usize], strides: &[Vec<usize>], mut f: impl FnMut(&[usize])) {
    let total: usize = cards.iter().product();
    let mut counter = vec![0usize; cards.len()];
    let mut offsets = vec![0usize; strides.len()];
    for _ in 0..total {
        f(&offsets);
        for i in (0..cards.len()).rev() {
            counter[i] += 1;
            for (o, s) in offsets.iter_mut().zip(strides) {
                *o += s[i];
            }
            if counter[i] < cards[i] {
                break;
            }
            for (o, s) in offsets.iter_mut().zip(strides) {
                *o -= s[i] * cards[i];
            }
            counter[i] = 0;
        }
    }
}

impl Factor {
    pub fn size(&self) -> usize {
        self.values.len()
    }

    /// Strides of this factor along `scope`, zero for variables it lacks.
    fn strides_in(&self, scope: &[usize]) -> Vec<usize> {
        let mut own = vec![0usize; self.vars.len()];
        let mut s = 1;
        for i in (0..self.vars.len()).rev() {
            own[i] = s;
            s *= self.cards[i];
        }
        scope
            .iter()
            .map(|x| self.vars.iter().position(|y| y == x).map_or(0, |i| own[i]))
            .collect()
    }

    /// The table `P(v | parents)` as a factor over `{v} ∪ parents`.
    pub fn from_cpt(bn: &DiscreteBayesNet, v: usize) -> Factor {
        let mut vars = bn.parents(v);
        vars.push(v);
        vars.sort_unstable();
        let cards: Vec<usize> = vars.iter().map(|&x| bn.cardinality(x)).collect();
        // the table is laid out as (parents..., v) with v fastest
        let mut layout = bn.parents(v);
        layout.push(v);
        let mut table_stride = vec![0usize; layout.len()];
        let mut s = 1;
        for i in (0..layout.len()).rev() {
            table_stride[i] = s;
            s *= bn.cardinality(layout[i]);
        }
        let strides: Vec<usize> = vars
            .iter()
            .map(|x| table_stride[layout.iter().position(|y| y == x).unwrap()])
            .collect();
        let cpt = bn.cpt(v);
        let mut values = Vec::with_capacity(cpt.len());
        for_each_assignment(&cards, &[strides], |o| values.push(cpt[o[0]]));
        Factor { vars, cards, values }
    }

    pub fn product(&self, other: &Factor) -> Factor {
        let scope: Vec<usize> = self
            .vars
            .iter()
            .chain(&other.vars)
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let cards: Vec<usize> = scope
            .iter()
            .map(|x| {
                let i = self.vars.iter().position(|y| y == x);
                i.map_or_else(
                    || other.cards[other.vars.iter().position(|y| y == x).unwrap()],
                    |i| self.cards[i],
                )
            })
            .collect();
        let strides = [self.strides_in(&scope), other.strides_in(&scope)];
        let mut values = Vec::with_capacity(cards.iter().product());
        for_each_assignment(&cards, &strides, |o| {
            values.push(self.values[o[0]] * other.values[o[1]])
        });
        Factor {
            vars: scope,
            cards,
            values,
        }
    }

    pub fn sum_out(&self, x: usize) -> Factor {
        let Some(i) = self.vars.iter().position(|&y| y == x) else {
            return self.clone();
        };
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(i);
        cards.remove(i);
        let out = Factor {
            vars,
            cards: cards.clone(),
            values: vec![0.0; cards.iter().product()],
        };
        let target = out.strides_in(&self.vars);
        let mut values = out.values;
        let mut k = 0;
        for_each_assignment(&self.cards, &[target], |o| {
            values[o[0]] += self.values[k];
            k += 1;
        });
        Factor {
            values,
            ..out
        }
    }

    /// Marginal over the listed variables.
    pub fn marginal(&self, keep: &[usize]) -> Factor {
        let drop: Vec<usize> = self
            .vars
            .iter()
            .copied()
            .filter(|x| !keep.contains(x))
            .collect();
        drop.into_iter().fold(self.clone(), |f, x| f.sum_out(x))
    }
}

fn scope_size(bn: &DiscreteBayesNet, scope: &BTreeSet<usize>) -> usize {
    scope
        .iter()
        .try_fold(1usize, |acc, &x| acc.checked_mul(bn.cardinality(x)))
        .unwrap_or(usize::MAX)
}

/// Exact joint marginal over `targets`, or `None` when some intermediate
/// factor would exceed `limit` entries.
pub fn joint_marginal(bn: &DiscreteBayesNet, targets: &[usize], limit: usize) -> Option<Factor> {
    let targets: BTreeSet<usize> = targets.iter().copied().collect();
    let relevant = bn.dag().ancestral_closure(&targets);
    let mut factors: Vec<Factor> = relevant.iter().map(|&v| Factor::from_cpt(bn, v)).collect();
    let mut pending: BTreeSet<usize> = relevant.difference(&targets).copied().collect();
    while !pending.is_empty() {
        // eliminate the variable whose merged factor is smallest
        let (x, _) = pending
            .iter()
            .map(|&x| {
                let scope: BTreeSet<usize> = factors
                    .iter()
                    .filter(|f| f.vars.contains(&x))
                    .flat_map(|f| f.vars.iter().copied())
                    .collect();
                (x, scope_size(bn, &scope))
            })
            .min_by_key(|&(x, s)| (s, x))?;
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.vars.contains(&x));
        let scope: BTreeSet<usize> = touching.iter().flat_map(|f| f.vars.iter().copied()).collect();
        if scope_size(bn, &scope) > limit {
            return None;
        }
        factors = rest;
        if let Some(merged) = touching.into_iter().reduce(|a, b| a.product(&b)) {
            factors.push(merged.sum_out(x));
        }
        pending.remove(&x);
    }
    let scope: BTreeSet<usize> = factors.iter().flat_map(|f| f.vars.iter().copied()).collect();
    if scope_size(bn, &scope) > limit {
        return None;
    }
    factors.into_iter().reduce(|a, b| a.product(&b))
}

fn plogp_ratio(joint: &Factor, x: usize, y: usize, given: &[usize]) -> f64 {
    let mut xz: Vec<usize> = given.to_vec();
    xz.push(x);
    let mut yz: Vec<usize> = given.to_vec();
    yz.push(y);
    let pxz = joint.marginal(&xz);
    let pyz = joint.marginal(&yz);
    let pz = joint.marginal(given);
    let strides = [
        pxz.strides_in(&joint.vars),
        pyz.strides_in(&joint.vars),
        pz.strides_in(&joint.vars),
    ];
    let mut total = 0.0;
    let mut k = 0;
    for_each_assignment(&joint.cards, &strides, |o| {
        let p = joint.values[k];
        k += 1;
        if p > 0.0 {
            total += p * (p * pz.values[o[2]] / (pxz.values[o[0]] * pyz.values[o[1]])).ln();
        }
    });
    total.max(0.0)
}

/// `I(X; Y | Z)` in nats under the network's joint distribution: exact when
/// variable elimination stays under [`EXACT_STATE_LIMIT`], otherwise a
/// plug-in estimate from [`FALLBACK_SAMPLE_ROWS`] seeded samples.
pub fn mutual_information(bn: &DiscreteBayesNet, x: usize, y: usize, given: &[usize]) -> Result<f64> {
    let mut targets: Vec<usize> = given.to_vec();
    targets.extend([x, y]);
    if let Some(joint) = joint_marginal(bn, &targets, EXACT_STATE_LIMIT) {
        return Ok(plogp_ratio(&joint, x, y, given));
    }
    let d = bn.sample(FALLBACK_SAMPLE_ROWS, 0)?;
    let set = |extra: &[usize]| {
        let mut s: Vec<usize> = given.iter().chain(extra).copied().collect();
        s.sort_unstable();
        d.n_log_n(&s)
    };
    let n = d.n_rows() as f64;
    Ok(((set(&[x, y]) + set(&[]) - set(&[x]) - set(&[y])) / n).max(0.0))
}
