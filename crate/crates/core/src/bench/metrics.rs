//! Scoring a discovery run against the planted truth.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graphs::Pdag;

/// Confounder recovery counts and rates. Rates are `None` when their
/// denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConfounderScore {
    pub ok: usize,
    pub not_ok: usize,
    pub n_truth: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

pub fn f1_score(precision: Option<f64>, recall: Option<f64>) -> Option<f64> {
    match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    }
}

fn unordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    }
}

/// A learnt latent is correct when its child pair equals that of a true
/// latent not matched yet.
pub fn compare_confounders(truth: &[(String, String)], learned: &[(String, String)]) -> ConfounderScore {
    let mut remaining: Vec<(String, String)> = truth.iter().map(|(a, b)| unordered(a, b)).collect();
    let mut ok = 0;
    for (a, b) in learned {
        let key = unordered(a, b);
        if let Some(i) = remaining.iter().position(|t| *t == key) {
            remaining.swap_remove(i);
            ok += 1;
        }
    }
    let not_ok = learned.len() - ok;
    let precision = (!learned.is_empty()).then(|| ok as f64 / learned.len() as f64);
    let recall = (!truth.is_empty()).then(|| ok as f64 / truth.len() as f64);
    ConfounderScore {
        ok,
        not_ok,
        n_truth: truth.len(),
        precision,
        recall,
        f1: f1_score(precision, recall),
    }
}

/// Link-level comparison of two CPDAGs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CpdagScore {
    /// Same link with the same type and orientation.
    pub ok: usize,
    /// True links absent from the learnt graph.
    pub miss: usize,
    /// Arcs on both sides pointing in opposite directions.
    pub rev: usize,
    /// Arc on one side, undirected edge on the other.
    pub type_mismatch: usize,
    /// Learnt links between nodes that are not linked in the truth.
    pub xs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Link {
    Arc(String, String),
    Edge,
}

/// Node keys shared by both graphs: observed names, and for latents their
/// sorted child pair.
fn keyed_links(p: &Pdag) -> (BTreeSet<String>, BTreeMap<(String, String), Link>) {
    let key = |v: usize| match p.latents.iter().find(|l| l.node == v) {
        Some(l) => {
            let (a, b) = unordered(&p.names[l.children.0], &p.names[l.children.1]);
            format!("\u{0}latent\u{0}{a}\u{0}{b}")
        }
        None => p.names[v].clone(),
    };
    let observed = (0..p.n_nodes())
        .filter(|&v| !p.is_latent(v))
        .map(|v| p.names[v].clone())
        .collect();
    let mut links = BTreeMap::new();
    for &(u, v) in &p.directed {
        let (ku, kv) = (key(u), key(v));
        links.insert(unordered(&ku, &kv), Link::Arc(ku, kv));
    }
    for &(u, v) in &p.undirected {
        links.insert(unordered(&key(u), &key(v)), Link::Edge);
    }
    (observed, links)
}

/// Compares a learnt CPDAG with the true one. Both must have the same
/// observed nodes; latents are identified by their child pairs, so a learnt
/// latent with no true counterpart only produces `xs` links and vice versa.
pub fn compare_cpdags(truth: &Pdag, learned: &Pdag) -> Result<CpdagScore> {
    let (obs_t, links_t) = keyed_links(truth);
    let (obs_l, links_l) = keyed_links(learned);
    if obs_t != obs_l {
        let only_t: Vec<&String> = obs_t.difference(&obs_l).collect();
        let only_l: Vec<&String> = obs_l.difference(&obs_t).collect();
        return Err(Error::NodeSetMismatch(format!(
            "only in truth: {only_t:?}, only learnt: {only_l:?}"
        )));
    }
    let mut s = CpdagScore::default();
    for (pair, lt) in &links_t {
        match (lt, links_l.get(pair)) {
            (_, None) => s.miss += 1,
            (Link::Edge, Some(Link::Edge)) => s.ok += 1,
            (Link::Arc(a, b), Some(Link::Arc(c, d))) => {
                if a == c && b == d {
                    s.ok += 1;
                } else {
                    s.rev += 1;
                }
            }
            _ => s.type_mismatch += 1,
        }
    }
    s.xs = links_l.keys().filter(|k| !links_t.contains_key(*k)).count();
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{cpdag_with_names, Dag, LatentNode};

    fn pairs(xs: &[(&str, &str)]) -> Vec<(String, String)> {
        xs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn perfect_confounder_match() {
        let t = pairs(&[("A", "B"), ("C", "D")]);
        let s = compare_confounders(&t, &pairs(&[("D", "C"), ("A", "B")]));
        assert_eq!((s.ok, s.not_ok), (2, 0));
        assert_eq!((s.precision, s.recall, s.f1), (Some(1.0), Some(1.0), Some(1.0)));
    }

    #[test]
    fn half_right() {
        let t = pairs(&[("A", "B"), ("C", "D")]);
        let s = compare_confounders(&t, &pairs(&[("A", "B"), ("A", "C")]));
        assert_eq!((s.ok, s.not_ok), (1, 1));
        assert_eq!((s.precision, s.recall, s.f1), (Some(0.5), Some(0.5), Some(0.5)));
    }

    #[test]
    fn truth_matched_once() {
        let t = pairs(&[("A", "B")]);
        let s = compare_confounders(&t, &pairs(&[("A", "B"), ("B", "A")]));
        assert_eq!((s.ok, s.not_ok), (1, 1));
    }

    #[test]
    fn undefined_rates() {
        let s = compare_confounders(&[], &[]);
        assert_eq!((s.precision, s.recall, s.f1), (None, None, None));
    }

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identical_cpdags() {
        let g = Dag::from_arcs(4, &[(0, 2), (1, 2), (2, 3)]).unwrap();
        let p = cpdag_with_names(&g, names(&["A", "B", "C", "D"]));
        let s = compare_cpdags(&p, &p).unwrap();
        assert_eq!(s, CpdagScore { ok: 3, ..CpdagScore::default() });
    }

    #[test]
    fn reversed_and_type_errors() {
        let n = names(&["A", "B", "C", "D"]);
        // truth: A -> C <- B, C -> D
        let t = cpdag_with_names(&Dag::from_arcs(4, &[(0, 2), (1, 2), (2, 3)]).unwrap(), n.clone());
        // learnt: A -> C <- B, B - D
        let l = cpdag_with_names(&Dag::from_arcs(4, &[(0, 2), (1, 2), (3, 1)]).unwrap(), n);
        let s = compare_cpdags(&t, &l).unwrap();
        assert_eq!(s.ok, 2);
        assert_eq!(s.miss, 1);
        assert_eq!(s.xs, 1);

        let mut r = t.clone();
        r.directed.remove(&(2, 3));
        r.directed.insert((3, 2));
        let s = compare_cpdags(&t, &r).unwrap();
        assert_eq!((s.ok, s.rev), (2, 1));

        let mut e = t.clone();
        e.directed.remove(&(2, 3));
        e.undirected.insert((2, 3));
        let s = compare_cpdags(&t, &e).unwrap();
        assert_eq!((s.ok, s.type_mismatch), (2, 1));
    }

    #[test]
    fn latents_match_by_children() {
        // truth: L -> A, L -> B; learnt: same structure with the latent stored at another id
        let t = {
            let g = Dag::from_arcs(3, &[(2, 0), (2, 1)]).unwrap();
            let mut p = cpdag_with_names(&g, names(&["A", "B", "L1"]));
            p.latents.push(LatentNode { node: 2, children: (0, 1) });
            p
        };
        let l = {
            let g = Dag::from_arcs(3, &[(0, 1), (0, 2)]).unwrap();
            let mut p = cpdag_with_names(&g, names(&["H", "A", "B"]));
            p.latents.push(LatentNode { node: 0, children: (1, 2) });
            p
        };
        let s = compare_cpdags(&t, &l).unwrap();
        assert_eq!((s.ok, s.miss, s.xs), (2, 0, 0));
    }

    #[test]
    fn observed_mismatch_is_an_error() {
        let a = cpdag_with_names(&Dag::new(2), names(&["A", "B"]));
        let b = cpdag_with_names(&Dag::new(2), names(&["A", "C"]));
        assert!(matches!(compare_cpdags(&a, &b), Err(Error::NodeSetMismatch(_))));
    }

    #[test]
    fn swapping_sides_swaps_miss_and_xs() {
        let n = names(&["A", "B", "C", "D"]);
        let t = cpdag_with_names(&Dag::from_arcs(4, &[(0, 2), (1, 2), (2, 3)]).unwrap(), n.clone());
        let l = cpdag_with_names(&Dag::from_arcs(4, &[(0, 1), (1, 2), (0, 3)]).unwrap(), n);
        let a = compare_cpdags(&t, &l).unwrap();
        let b = compare_cpdags(&l, &t).unwrap();
        assert_eq!((a.miss, a.xs, a.rev, a.type_mismatch), (b.xs, b.miss, b.rev, b.type_mismatch));
    }
}
