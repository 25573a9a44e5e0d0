//! Greedy search for a conditioning set that makes two variables independent.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scoring::{IndepVerdict, ScoreContext};

/// A request for some `Z` with `U ⟂ V | Z`, `compulsory ⊆ Z`,
/// `Z ∩ forbidden = ∅` and `|Z| ≤ h`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatorQuery {
    pub u: usize,
    pub v: usize,
    pub h: usize,
    pub alpha: f64,
    pub compulsory: BTreeSet<usize>,
    pub forbidden: BTreeSet<usize>,
}

impl SeparatorQuery {
    pub fn new(u: usize, v: usize, h: usize, alpha: f64) -> Self {
        SeparatorQuery {
            u,
            v,
            h,
            alpha,
            compulsory: BTreeSet::new(),
            forbidden: BTreeSet::new(),
        }
    }

    pub fn compulsory(mut self, c: impl IntoIterator<Item = usize>) -> Self {
        self.compulsory.extend(c);
        self
    }

    pub fn forbidden(mut self, f: impl IntoIterator<Item = usize>) -> Self {
        self.forbidden.extend(f);
        self
    }

    pub fn validate(&self, n_variables: usize) -> Result<()> {
        for &x in [self.u, self.v]
            .iter()
            .chain(&self.compulsory)
            .chain(&self.forbidden)
        {
            if x >= n_variables {
                return Err(Error::UnknownVariable(x));
            }
        }
        if self.u == self.v {
            return Err(Error::DuplicateVariable(self.u));
        }
        if self.compulsory.contains(&self.u)
            || self.compulsory.contains(&self.v)
            || !self.compulsory.is_disjoint(&self.forbidden)
        {
            return Err(Error::OverlappingSets);
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "risk level {} outside (0, 1)",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// One test performed by the search. `added` is `None` for the initial test
/// on the compulsory set.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatorStep {
    pub added: Option<usize>,
    pub verdict: IndepVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatorResult {
    pub found: bool,
    /// The separator when `found`; otherwise the last set tested.
    pub z: BTreeSet<usize>,
    pub trace: Vec<SeparatorStep>,
}

impl SeparatorResult {
    pub fn separator(&self) -> Option<&BTreeSet<usize>> {
        self.found.then_some(&self.z)
    }

    /// Degrees of freedom of the last test, if any test ran.
    pub fn dof(&self) -> Option<u64> {
        self.trace.last().map(|s| s.verdict.dof)
    }
}

/// Starts from the compulsory set and greedily adds the candidate that
/// minimizes `f_BIC(U, V | Z ∪ {Y})` until the test accepts independence or
/// `|Z|` reaches `h`. Ties go to the lowest variable id.
///
/// A failed search means the greedy path found nothing, not that no
/// separator exists.
pub fn find_separator(q: &SeparatorQuery, ctx: &ScoreContext) -> Result<SeparatorResult> {
    q.validate(ctx.n_variables())?;
    let mut z = q.compulsory.clone();
    let mut excluded = q.forbidden.clone();
    excluded.insert(q.u);
    excluded.insert(q.v);
    let mut trace = Vec::new();

    if z.len() > q.h {
        return Ok(SeparatorResult {
            found: false,
            z,
            trace,
        });
    }
    let verdict = ctx.test(q.u, q.v, &z, q.alpha)?;
    trace.push(SeparatorStep {
        added: None,
        verdict,
    });
    if verdict.independent {
        return Ok(SeparatorResult {
            found: true,
            z,
            trace,
        });
    }

    while z.len() < q.h {
        let candidates: Vec<usize> = (0..ctx.n_variables())
            .filter(|y| !z.contains(y) && !excluded.contains(y))
            .collect();
        let scored = candidates
            .par_iter()
            .map(|&y| {
                let mut zy: Vec<usize> = z.iter().copied().collect();
                zy.push(y);
                ctx.f_bic(q.u, q.v, &zy).map(|g| (y, g.statistic))
            })
            .collect::<Result<Vec<_>>>()?;
        let Some(&(x, _)) = scored
            .iter()
            .reduce(|best, c| if c.1 < best.1 { c } else { best })
        else {
            break;
        };
        z.insert(x);
        let verdict = ctx.test(q.u, q.v, &z, q.alpha)?;
        trace.push(SeparatorStep {
            added: Some(x),
            verdict,
        });
        if verdict.independent {
            return Ok(SeparatorResult {
                found: true,
                z,
                trace,
            });
        }
    }
    Ok(SeparatorResult {
        found: false,
        z,
        trace,
    })
}
