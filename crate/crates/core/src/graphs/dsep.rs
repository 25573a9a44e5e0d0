//! d-separation: active-trail reachability and literal trail enumeration.

use std::collections::BTreeSet;

use super::Dag;
use crate::error::{Error, Result};

fn check_sets(
    g: &Dag,
    u: &BTreeSet<usize>,
    v: &BTreeSet<usize>,
    z: &BTreeSet<usize>,
) -> Result<()> {
    for &x in u.iter().chain(v).chain(z) {
        if x >= g.n_nodes() {
            return Err(Error::NodeOutOfRange(x));
        }
    }
    if !u.is_disjoint(v) || !u.is_disjoint(z) || !v.is_disjoint(z) {
        return Err(Error::OverlappingSets);
    }
    Ok(())
}

/// Nodes reachable from `sources` along trails that are active given `z`.
///
/// Each node is visited at most twice, once per entry direction: `up` when
/// entered from a child, `down` when entered from a parent.
pub fn reachable(g: &Dag, sources: &BTreeSet<usize>, z: &BTreeSet<usize>) -> BTreeSet<usize> {
    let n = g.n_nodes();
    let mut in_z = vec![false; n];
    for &x in z {
        in_z[x] = true;
    }
    // a collider is open iff it has a descendant in z, i.e. it is an ancestor of z
    let mut z_anc = vec![false; n];
    for x in g.ancestral_closure(z) {
        z_anc[x] = true;
    }

    let mut visited_up = vec![false; n];
    let mut visited_down = vec![false; n];
    let mut stack: Vec<(usize, bool)> = sources.iter().map(|&s| (s, true)).collect();
    let mut out = BTreeSet::new();
    while let Some((y, up)) = stack.pop() {
        let seen = if up { &mut visited_up } else { &mut visited_down };
        if seen[y] {
            continue;
        }
        seen[y] = true;
        if !in_z[y] {
            out.insert(y);
        }
        if up {
            if !in_z[y] {
                stack.extend(g.parents(y).iter().map(|&p| (p, true)));
                stack.extend(g.children(y).iter().map(|&c| (c, false)));
            }
        } else {
            if !in_z[y] {
                stack.extend(g.children(y).iter().map(|&c| (c, false)));
            }
            if z_anc[y] {
                stack.extend(g.parents(y).iter().map(|&p| (p, true)));
            }
        }
    }
    out
}

/// Whether every node of `u` is d-separated from every node of `v` by `z`.
pub fn d_separated(
    g: &Dag,
    u: &BTreeSet<usize>,
    v: &BTreeSet<usize>,
    z: &BTreeSet<usize>,
) -> Result<bool> {
    check_sets(g, u, v, z)?;
    let reach = reachable(g, u, z);
    Ok(reach.is_disjoint(v))
}

/// A trail `⟨X_1, …, X_k⟩`; `forward[i]` is true when the step between
/// `nodes[i]` and `nodes[i + 1]` is the arc `nodes[i] -> nodes[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trail {
    pub nodes: Vec<usize>,
    pub forward: Vec<bool>,
}

/// Why an interior trail node blocks the trail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Blocker {
    /// A collider that is not in the conditioning set and has no descendant in it.
    Collider(usize),
    /// A non-collider in the conditioning set.
    Conditioned(usize),
}

impl Trail {
    pub fn is_collider(&self, i: usize) -> bool {
        self.forward[i - 1] && !self.forward[i]
    }

    /// First interior node blocking the trail given `z`, if any.
    pub fn blocker(&self, g: &Dag, z: &BTreeSet<usize>) -> Option<Blocker> {
        for i in 1..self.nodes.len().saturating_sub(1) {
            let x = self.nodes[i];
            if self.is_collider(i) {
                if !z.contains(&x) && g.descendants(x).is_disjoint(z) {
                    return Some(Blocker::Collider(x));
                }
            } else if z.contains(&x) {
                return Some(Blocker::Conditioned(x));
            }
        }
        None
    }

    pub fn is_active(&self, g: &Dag, z: &BTreeSet<usize>) -> bool {
        self.blocker(g, z).is_none()
    }
}

/// All simple trails between `x` and `y`, stopping after `limit` trails.
pub fn simple_trails(g: &Dag, x: usize, y: usize, limit: Option<usize>) -> Vec<Trail> {
    fn walk(
        g: &Dag,
        y: usize,
        path: &mut Vec<usize>,
        dirs: &mut Vec<bool>,
        on_path: &mut [bool],
        out: &mut Vec<Trail>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        let last = *path.last().unwrap();
        if last == y {
            out.push(Trail {
                nodes: path.clone(),
                forward: dirs.clone(),
            });
            return;
        }
        let steps = g
            .children(last)
            .iter()
            .map(|&c| (c, true))
            .chain(g.parents(last).iter().map(|&p| (p, false)));
        for (next, fwd) in steps {
            if on_path[next] {
                continue;
            }
            on_path[next] = true;
            path.push(next);
            dirs.push(fwd);
            walk(g, y, path, dirs, on_path, out, limit);
            path.pop();
            dirs.pop();
            on_path[next] = false;
        }
    }

    let mut out = Vec::new();
    if x == y {
        return out;
    }
    let mut on_path = vec![false; g.n_nodes()];
    on_path[x] = true;
    walk(
        g,
        y,
        &mut vec![x],
        &mut Vec::new(),
        &mut on_path,
        &mut out,
        limit.unwrap_or(usize::MAX),
    );
    out
}

/// d-separation decided by enumerating every simple trail; exponential, meant
/// for small graphs and for explaining a verdict.
pub fn d_separated_by_trails(
    g: &Dag,
    u: &BTreeSet<usize>,
    v: &BTreeSet<usize>,
    z: &BTreeSet<usize>,
) -> Result<bool> {
    check_sets(g, u, v, z)?;
    for &x in u {
        for &y in v {
            if simple_trails(g, x, y, None)
                .iter()
                .any(|t| t.is_active(g, z))
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
