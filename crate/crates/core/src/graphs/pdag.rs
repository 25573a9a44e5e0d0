//! Partially directed graphs, CPDAG completion and their JSON form.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Dag;
use crate::error::{Error, Result};

/// A latent node annotation: the latent's node id and its two observed children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatentNode {
    pub node: usize,
    pub children: (usize, usize),
}

/// Partially directed graph with named nodes.
///
/// `undirected` stores each edge once as `(u, v)` with `u < v`. Directed arcs
/// and undirected edges never share an unordered pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pdag {
    pub names: Vec<String>,
    pub directed: BTreeSet<(usize, usize)>,
    pub undirected: BTreeSet<(usize, usize)>,
    pub latents: Vec<LatentNode>,
}

impl Pdag {
    pub fn n_nodes(&self) -> usize {
        self.names.len()
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.directed.contains(&(u, v))
            || self.directed.contains(&(v, u))
            || self.undirected.contains(&(u.min(v), u.max(v)))
    }

    /// Number of links (arcs plus edges).
    pub fn n_links(&self) -> usize {
        self.directed.len() + self.undirected.len()
    }

    pub fn is_latent(&self, v: usize) -> bool {
        self.latents.iter().any(|l| l.node == v)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_nodes();
        let pairs = self
            .directed
            .iter()
            .chain(&self.undirected)
            .copied()
            .collect::<Vec<_>>();
        let mut seen = BTreeSet::new();
        for (u, v) in pairs {
            if u >= n || v >= n {
                return Err(Error::NodeOutOfRange(u.max(v)));
            }
            if u == v {
                return Err(Error::SelfArc(u));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateArc(u, v));
            }
        }
        for (u, v) in &self.undirected {
            if u > v {
                return Err(Error::InvalidModel(format!(
                    "undirected edge ({u}, {v}) not stored in canonical order"
                )));
            }
        }
        for l in &self.latents {
            let (a, b) = l.children;
            if a == b || a >= n || b >= n || l.node >= n {
                return Err(Error::InvalidModel(format!(
                    "latent `{}` must have two distinct children",
                    self.names.get(l.node).map_or("?", String::as_str)
                )));
            }
            if self.is_latent(a) || self.is_latent(b) {
                return Err(Error::InvalidModel(format!(
                    "latent `{}` has a latent child",
                    self.names[l.node]
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> PdagJson {
        let name = |v: usize| self.names[v].clone();
        PdagJson {
            nodes: self.names.clone(),
            directed: self.directed.iter().map(|&(u, v)| [name(u), name(v)]).collect(),
            undirected: self
                .undirected
                .iter()
                .map(|&(u, v)| [name(u), name(v)])
                .collect(),
            latents: self
                .latents
                .iter()
                .map(|l| LatentJson {
                    name: name(l.node),
                    children: [name(l.children.0), name(l.children.1)],
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PdagJson) -> Result<Pdag> {
        let index = |name: &str| {
            j.nodes
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::UnknownName(name.to_owned()))
        };
        let mut p = Pdag {
            names: j.nodes.clone(),
            directed: BTreeSet::new(),
            undirected: BTreeSet::new(),
            latents: Vec::new(),
        };
        for [u, v] in &j.directed {
            p.directed.insert((index(u)?, index(v)?));
        }
        for [u, v] in &j.undirected {
            let (u, v) = (index(u)?, index(v)?);
            p.undirected.insert((u.min(v), u.max(v)));
        }
        for l in &j.latents {
            p.latents.push(LatentNode {
                node: index(&l.name)?,
                children: (index(&l.children[0])?, index(&l.children[1])?),
            });
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatentJson {
    pub name: String,
    pub children: [String; 2],
}

/// On-disk CPDAG:
/// `{"nodes": [...], "directed": [[u, v]...], "undirected": [[u, v]...],
/// "latents": [{"name": "L1", "children": [a, b]}...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdagJson {
    pub nodes: Vec<String>,
    pub directed: Vec<[String; 2]>,
    pub undirected: Vec<[String; 2]>,
    #[serde(default)]
    pub latents: Vec<LatentJson>,
}

/// Mixed graph used while propagating orientations.
struct Orienter {
    n: usize,
    arc: Vec<Vec<bool>>,
    edge: Vec<Vec<bool>>,
}

impl Orienter {
    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.arc[a][b] || self.arc[b][a] || self.edge[a][b]
    }

    fn orient(&mut self, a: usize, b: usize) {
        self.edge[a][b] = false;
        self.edge[b][a] = false;
        self.arc[a][b] = true;
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in 0..self.n {
                if a != b && self.edge[a][b] {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// a -> b, b - c, a and c non-adjacent  =>  b -> c
    fn rule1(&mut self, b: usize, c: usize) -> bool {
        (0..self.n).any(|a| self.arc[a][b] && !self.adjacent(a, c))
    }

    /// a -> b -> c, a - c  =>  a -> c
    fn rule2(&mut self, a: usize, c: usize) -> bool {
        (0..self.n).any(|b| self.arc[a][b] && self.arc[b][c])
    }

    /// a - c -> b, a - d -> b, c and d non-adjacent  =>  a -> b
    fn rule3(&mut self, a: usize, b: usize) -> bool {
        let mids: Vec<usize> = (0..self.n)
            .filter(|&c| self.edge[a][c] && self.arc[c][b])
            .collect();
        mids.iter().enumerate().any(|(i, &c)| {
            mids[i + 1..].iter().any(|&d| !self.adjacent(c, d))
        })
    }

    /// a - c -> d -> b, a adjacent to d, c and b non-adjacent  =>  a -> b
    fn rule4(&mut self, a: usize, b: usize) -> bool {
        (0..self.n).any(|c| {
            self.edge[a][c]
                && !self.adjacent(c, b)
                && (0..self.n).any(|d| self.arc[c][d] && self.arc[d][b] && self.adjacent(a, d))
        })
    }

    fn close(&mut self) {
        loop {
            let mut changed = false;
            let rules: [fn(&mut Orienter, usize, usize) -> bool; 4] =
                [Self::rule1, Self::rule2, Self::rule3, Self::rule4];
            for rule in rules {
                for (a, b) in self.edges() {
                    if self.edge[a][b] && rule(self, a, b) {
                        self.orient(a, b);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }
}

/// The CPDAG of `g`'s Markov equivalence class: v-structure arcs directed,
/// Meek's rules R1–R4 applied to a fixed point, everything else undirected.
/// Nodes are named by their index.
pub fn cpdag_of(g: &Dag) -> Pdag {
    let names = (0..g.n_nodes()).map(|i| i.to_string()).collect::<Vec<_>>();
    cpdag_with_names(g, names)
}

pub fn cpdag_with_names(g: &Dag, names: Vec<String>) -> Pdag {
    let n = g.n_nodes();
    let mut o = Orienter {
        n,
        arc: vec![vec![false; n]; n],
        edge: vec![vec![false; n]; n],
    };
    for (u, v) in g.arcs() {
        o.edge[u][v] = true;
        o.edge[v][u] = true;
    }
    for (x, z, y) in g.v_structures() {
        o.orient(x, z);
        o.orient(y, z);
    }
    o.close();

    let mut directed = BTreeSet::new();
    let mut undirected = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            if o.arc[a][b] {
                directed.insert((a, b));
            }
            if a < b && o.edge[a][b] {
                undirected.insert((a, b));
            }
        }
    }
    Pdag {
        names,
        directed,
        undirected,
        latents: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_is_fully_undirected() {
        let p = cpdag_of(&Dag::from_arcs(3, &[(0, 1), (1, 2)]).unwrap());
        assert!(p.directed.is_empty());
        assert_eq!(p.undirected, BTreeSet::from([(0, 1), (1, 2)]));
    }

    #[test]
    fn collider_stays_directed() {
        let p = cpdag_of(&Dag::from_arcs(3, &[(0, 2), (1, 2)]).unwrap());
        assert_eq!(p.directed, BTreeSet::from([(0, 2), (1, 2)]));
        assert!(p.undirected.is_empty());
    }

    #[test]
    fn rule1_propagates_below_collider() {
        // 0 -> 2 <- 1, 2 -> 3: the arc out of the collider is compelled
        let p = cpdag_of(&Dag::from_arcs(4, &[(0, 2), (1, 2), (2, 3)]).unwrap());
        assert!(p.directed.contains(&(2, 3)));
    }

    #[test]
    fn rule2_orients_shortcut() {
        // 0 -> 2 <- 1 (v-structure), 2 -> 3, 0 -> 3: R1 gives 2 -> 3, R2 gives 0 -> 3
        let p = cpdag_of(&Dag::from_arcs(4, &[(0, 2), (1, 2), (2, 3), (0, 3)]).unwrap());
        assert!(p.directed.contains(&(0, 3)));
        assert!(p.directed.contains(&(2, 3)));
    }

    #[test]
    fn json_roundtrip_keeps_latents() {
        let g = Dag::from_arcs(3, &[(2, 0), (2, 1)]).unwrap();
        let mut p = cpdag_with_names(&g, vec!["A".into(), "B".into(), "L1".into()]);
        p.latents.push(LatentNode {
            node: 2,
            children: (0, 1),
        });
        let text = serde_json::to_string(&p.to_json()).unwrap();
        assert!(text.contains(r#""latents":[{"name":"L1","children":["A","B"]}]"#));
        let back = Pdag::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn invalid_latent_rejected() {
        let j = PdagJson {
            nodes: vec!["A".into(), "L".into()],
            directed: vec![],
            undirected: vec![],
            latents: vec![LatentJson {
                name: "L".into(),
                children: ["A".into(), "A".into()],
            }],
        };
        assert!(Pdag::from_json(&j).is_err());
    }
}
