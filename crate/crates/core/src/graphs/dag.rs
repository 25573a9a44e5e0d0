use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A directed acyclic graph over nodes `0..n`.
///
/// Every mutation keeps the graph acyclic, free of self-arcs and with at most
/// one arc per unordered pair of nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Dag {
    parents: Vec<BTreeSet<usize>>,
    children: Vec<BTreeSet<usize>>,
}

impl Dag {
    pub fn new(n: usize) -> Self {
        Dag {
            parents: vec![BTreeSet::new(); n],
            children: vec![BTreeSet::new(); n],
        }
    }

    pub fn from_arcs(n: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        let mut g = Dag::new(n);
        for &(u, v) in arcs {
            g.add_arc(u, v)?;
        }
        Ok(g)
    }

    /// Builds a DAG from per-node parent sets.
    pub fn from_parents(parents: &[Vec<usize>]) -> Result<Self> {
        let mut g = Dag::new(parents.len());
        for (v, ps) in parents.iter().enumerate() {
            for &p in ps {
                g.add_arc(p, v)?;
            }
        }
        Ok(g)
    }

    pub fn n_nodes(&self) -> usize {
        self.parents.len()
    }

    pub fn n_arcs(&self) -> usize {
        self.parents.iter().map(BTreeSet::len).sum()
    }

    pub fn add_node(&mut self) -> usize {
        self.parents.push(BTreeSet::new());
        self.children.push(BTreeSet::new());
        self.parents.len() - 1
    }

    fn check(&self, v: usize) -> Result<()> {
        if v < self.n_nodes() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange(v))
        }
    }

    pub fn parents(&self, v: usize) -> &BTreeSet<usize> {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &BTreeSet<usize> {
        &self.children[v]
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        u < self.n_nodes() && self.children[u].contains(&v)
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.has_arc(u, v) || self.has_arc(v, u)
    }

    /// Whether a directed path `from ⇝ to` exists (a node reaches itself).
    pub fn has_path(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.n_nodes()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(x) = stack.pop() {
            for &c in &self.children[x] {
                if c == to {
                    return true;
                }
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        false
    }

    /// Whether `u -> v` could be added without breaking the invariants.
    pub fn can_add_arc(&self, u: usize, v: usize) -> bool {
        u != v
            && u < self.n_nodes()
            && v < self.n_nodes()
            && !self.adjacent(u, v)
            && !self.has_path(v, u)
    }

    pub fn add_arc(&mut self, u: usize, v: usize) -> Result<()> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(Error::SelfArc(u));
        }
        if self.adjacent(u, v) {
            return Err(Error::DuplicateArc(u, v));
        }
        if self.has_path(v, u) {
            return Err(Error::Cycle(u, v));
        }
        self.children[u].insert(v);
        self.parents[v].insert(u);
        Ok(())
    }

    pub fn remove_arc(&mut self, u: usize, v: usize) -> Result<()> {
        if !self.has_arc(u, v) {
            return Err(Error::MissingArc(u, v));
        }
        self.children[u].remove(&v);
        self.parents[v].remove(&u);
        Ok(())
    }

    /// Replaces `u -> v` by `v -> u`; fails (leaving the graph intact) if the
    /// reversed arc would close a cycle.
    pub fn reverse_arc(&mut self, u: usize, v: usize) -> Result<()> {
        self.remove_arc(u, v)?;
        if self.has_path(u, v) {
            self.children[u].insert(v);
            self.parents[v].insert(u);
            return Err(Error::Cycle(v, u));
        }
        self.children[v].insert(u);
        self.parents[u].insert(v);
        Ok(())
    }

    /// Arcs in lexicographic order.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        self.children
            .iter()
            .enumerate()
            .flat_map(|(u, cs)| cs.iter().map(move |&v| (u, v)))
            .collect()
    }

    /// Transitive closure of the children of `x`; `x` itself is excluded.
    pub fn descendants(&self, x: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<usize> = self.children[x].iter().copied().collect();
        while let Some(c) = stack.pop() {
            if out.insert(c) {
                stack.extend(self.children[c].iter().copied());
            }
        }
        out
    }

    /// The nodes of `seeds` together with all their ancestors.
    pub fn ancestral_closure(&self, seeds: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<usize> = seeds.iter().copied().collect();
        while let Some(x) = stack.pop() {
            if out.insert(x) {
                stack.extend(self.parents[x].iter().copied());
            }
        }
        out
    }

    /// Kahn's algorithm, smallest available id first.
    pub fn topological_order(&self) -> Vec<usize> {
        let n = self.n_nodes();
        let mut indeg: Vec<usize> = self.parents.iter().map(BTreeSet::len).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        order
    }

    /// Unordered pairs `(u, v)` with `u < v`, one per arc.
    pub fn skeleton(&self) -> BTreeSet<(usize, usize)> {
        self.arcs()
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect()
    }

    /// Unshielded colliders `x -> z <- y` as `(x, z, y)` with `x < y`.
    pub fn v_structures(&self) -> BTreeSet<(usize, usize, usize)> {
        let mut out = BTreeSet::new();
        for z in 0..self.n_nodes() {
            let ps: Vec<usize> = self.parents[z].iter().copied().collect();
            for (i, &x) in ps.iter().enumerate() {
                for &y in &ps[i + 1..] {
                    if !self.adjacent(x, y) {
                        out.insert((x, z, y));
                    }
                }
            }
        }
        out
    }

    /// Parents then children of `v`.
    pub(crate) fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.parents[v].iter().chain(self.children[v].iter()).copied()
    }

    /// Whether `u` and `v` are linked by any undirected path.
    pub fn connected(&self, u: usize, v: usize) -> bool {
        let mut seen = vec![false; self.n_nodes()];
        let mut queue = VecDeque::from([u]);
        seen[u] = true;
        while let Some(x) = queue.pop_front() {
            if x == v {
                return true;
            }
            for y in self.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        false
    }
}

/// Whether two DAGs share skeleton and v-structures.
pub fn markov_equivalent(g1: &Dag, g2: &Dag) -> Result<bool> {
    if g1.n_nodes() != g2.n_nodes() {
        return Err(Error::NodeSetMismatch(format!(
            "{} vs {} nodes",
            g1.n_nodes(),
            g2.n_nodes()
        )));
    }
    Ok(g1.skeleton() == g2.skeleton() && g1.v_structures() == g2.v_structures())
}

/// Named DAG as exchanged on disk: `{"nodes": [...], "arcs": [[u, v], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagJson {
    pub nodes: Vec<String>,
    pub arcs: Vec<[String; 2]>,
}

impl DagJson {
    pub fn from_dag(g: &Dag, names: &[String]) -> Self {
        DagJson {
            nodes: names.to_vec(),
            arcs: g
                .arcs()
                .into_iter()
                .map(|(u, v)| [names[u].clone(), names[v].clone()])
                .collect(),
        }
    }

    pub fn to_dag(&self) -> Result<Dag> {
        let index = |name: &str| {
            self.nodes
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::UnknownName(name.to_owned()))
        };
        let mut g = Dag::new(self.nodes.len());
        for [u, v] in &self.arcs {
            g.add_arc(index(u)?, index(v)?)?;
        }
        Ok(g)
    }
}
