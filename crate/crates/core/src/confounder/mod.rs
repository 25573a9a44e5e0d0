//! Latent confounder detection from the 3-cliques of a learnt DAG.
//!
//! A confounder `L` of two observed nodes tends to make a score-based learner
//! add an arc between its children plus extra arcs closing a triangle with a
//! neighbour. Each triangle is examined pair by pair with the greedy
//! separator search; triangles that look like such artifacts are replaced by
//! an explicit latent node with two children.

mod report;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use report::{AugmentedResultJson, TriangleJson};

use crate::ci::{find_separator, SeparatorQuery, SeparatorResult};
use crate::data::Dataset;
use crate::error::Result;
use crate::graphs::{cpdag_with_names, Dag, LatentNode, Pdag};
use crate::learner::{learn_with, LearnerConfig};
use crate::scoring::{IndepVerdict, ScoreContext};

/// A directed 3-clique: `source -> middle -> sink` and `source -> sink`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triangle {
    pub source: usize,
    pub middle: usize,
    pub sink: usize,
}

impl Triangle {
    pub fn nodes(&self) -> [usize; 3] {
        [self.source, self.middle, self.sink]
    }

    /// The three unordered pairs, each with the remaining node.
    pub fn pairs(&self) -> [((usize, usize), usize); 3] {
        let (s, m, k) = (self.source, self.middle, self.sink);
        [((s, m), k), ((s, k), m), ((m, k), s)]
    }
}

/// Every directed 3-clique of `g`, sorted by `(source, middle, sink)`.
pub fn enumerate_triangles(g: &Dag) -> Vec<Triangle> {
    let mut out = Vec::new();
    for source in 0..g.n_nodes() {
        for &middle in g.children(source) {
            for &sink in g.children(middle) {
                if g.has_arc(source, sink) {
                    out.push(Triangle {
                        source,
                        middle,
                        sink,
                    });
                }
            }
        }
    }
    out.sort();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// `C -> A -> B`, `C -> B`: the latent sits between `A` and `B`.
    Type1,
    /// `A -> B -> C`, `A -> C`: the latent sits between `A` and `B`.
    Type3,
    NotLatent,
}

/// Role assignment of a latent triangle; the latent's children are `A` and `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Roles {
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

/// Separator search for one pair of triangle nodes, the third node forbidden.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCheck {
    pub pair: (usize, usize),
    pub third: usize,
    pub search: SeparatorResult,
    /// The test given `Z ∪ {third}`, run only when a separator `Z` was found.
    pub with_third: Option<IndepVerdict>,
}

impl PairCheck {
    /// Separable without the third node, dependent once it is added.
    pub fn qualifies(&self) -> bool {
        self.search.found && self.with_third.is_some_and(|v| !v.independent)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleClassification {
    pub triangle: Triangle,
    pub verdict: Verdict,
    pub roles: Option<Roles>,
    /// Separator of `B` and `C`.
    pub witness: Option<BTreeSet<usize>>,
    pub checks: Vec<PairCheck>,
    /// Type 3 only: the neighbour `D` of `B` and its separator from `C`.
    pub witness_d: Option<(usize, BTreeSet<usize>)>,
}

fn same_pair(p: (usize, usize), x: usize, y: usize) -> bool {
    (p.0 == x && p.1 == y) || (p.0 == y && p.1 == x)
}

fn check_pair(
    ctx: &ScoreContext,
    pair: (usize, usize),
    third: usize,
    h: usize,
    alpha: f64,
) -> Result<PairCheck> {
    let q = SeparatorQuery::new(pair.0, pair.1, h, alpha).forbidden([third]);
    let search = find_separator(&q, ctx)?;
    let with_third = if search.found {
        let mut z = search.z.clone();
        z.insert(third);
        Some(ctx.test(pair.0, pair.1, &z, alpha)?)
    } else {
        None
    };
    Ok(PairCheck {
        pair,
        third,
        search,
        with_third,
    })
}

/// Decides whether a triangle is a latent artifact.
///
/// Exactly one pair must qualify, the other two must have no separator, and
/// the qualifying pair must be `{sink, source}` (Type 1) or `{middle, sink}`
/// (Type 3). A qualifying `{source, middle}` pair is never treated as latent.
pub fn classify_triangle(
    t: Triangle,
    ctx: &ScoreContext,
    h: usize,
    alpha: f64,
) -> Result<TriangleClassification> {
    let checks = t
        .pairs()
        .into_iter()
        .map(|(pair, third)| check_pair(ctx, pair, third, h, alpha))
        .collect::<Result<Vec<_>>>()?;
    let qualifying: Vec<&PairCheck> = checks.iter().filter(|c| c.qualifies()).collect();
    let others_inseparable = checks
        .iter()
        .filter(|c| !c.qualifies())
        .all(|c| !c.search.found);

    let mut out = TriangleClassification {
        triangle: t,
        verdict: Verdict::NotLatent,
        roles: None,
        witness: None,
        checks: checks.clone(),
        witness_d: None,
    };
    if let ([q], true) = (qualifying.as_slice(), others_inseparable) {
        let roles = if same_pair(q.pair, t.sink, t.source) {
            Some((
                Verdict::Type1,
                Roles {
                    a: t.middle,
                    b: t.sink,
                    c: t.source,
                },
            ))
        } else if same_pair(q.pair, t.middle, t.sink) {
            Some((
                Verdict::Type3,
                Roles {
                    a: t.source,
                    b: t.middle,
                    c: t.sink,
                },
            ))
        } else {
            None
        };
        if let Some((verdict, roles)) = roles {
            out.verdict = verdict;
            out.roles = Some(roles);
            out.witness = Some(q.search.z.clone());
        }
    }
    Ok(out)
}

/// Type 1 triangles are kept only when `B` has at least three parents.
pub fn filter_type1(c: &TriangleClassification, g: &Dag) -> bool {
    match (c.verdict, c.roles) {
        (Verdict::Type1, Some(r)) => g.parents(r.b).len() >= 3,
        _ => false,
    }
}

/// Type 3 triangles are kept when some other parent or child `D` of `B` can be
/// separated from `C` by a set containing `A`. Returns that `D` and its
/// separator.
pub fn filter_type3(
    c: &TriangleClassification,
    g: &Dag,
    ctx: &ScoreContext,
    h: usize,
    alpha: f64,
) -> Result<Option<(usize, BTreeSet<usize>)>> {
    let (Verdict::Type3, Some(r)) = (c.verdict, c.roles) else {
        return Ok(None);
    };
    let candidates: BTreeSet<usize> = g
        .parents(r.b)
        .iter()
        .filter(|&&d| d != r.a)
        .chain(g.children(r.b).iter().filter(|&&d| d != r.c))
        .copied()
        .collect();
    for d in candidates {
        let q = SeparatorQuery::new(d, r.c, h, alpha).compulsory([r.a]);
        let res = find_separator(&q, ctx)?;
        if res.found {
            return Ok(Some((d, res.z)));
        }
    }
    Ok(None)
}

/// A learnt DAG extended with latent nodes, and its CPDAG.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedResult {
    pub dag: Dag,
    pub names: Vec<String>,
    pub latents: Vec<LatentNode>,
    pub cpdag: Pdag,
    /// Accepted triangles left untouched because an earlier edit removed one
    /// of their arcs.
    pub skipped: Vec<Triangle>,
}

impl AugmentedResult {
    pub fn n_observed(&self) -> usize {
        self.names.len() - self.latents.len()
    }
}

fn fresh_latent_name(names: &[String], counter: &mut usize) -> String {
    loop {
        *counter += 1;
        let name = format!("L{counter}");
        if !names.contains(&name) {
            return name;
        }
    }
}

/// Replaces each accepted triangle by a latent: drops `A -> B` and the arc
/// between `B` and `C`, then adds `L -> A` and `L -> B`.
pub fn recreate_latents(
    g: &Dag,
    names: &[String],
    accepted: &[TriangleClassification],
) -> Result<AugmentedResult> {
    let mut dag = g.clone();
    let mut all_names = names.to_vec();
    let mut latents = Vec::new();
    let mut skipped = Vec::new();
    let mut counter = 0;
    let mut order: Vec<&TriangleClassification> = accepted.iter().collect();
    order.sort_by_key(|c| c.triangle);
    for c in order {
        let Some(r) = c.roles else { continue };
        if !dag.has_arc(r.a, r.b) || !dag.adjacent(r.b, r.c) {
            log::warn!(
                "skipping triangle ({}, {}, {}): an arc was removed by an earlier latent",
                all_names[c.triangle.source],
                all_names[c.triangle.middle],
                all_names[c.triangle.sink]
            );
            skipped.push(c.triangle);
            continue;
        }
        dag.remove_arc(r.a, r.b)?;
        if dag.has_arc(r.b, r.c) {
            dag.remove_arc(r.b, r.c)?;
        } else {
            dag.remove_arc(r.c, r.b)?;
        }
        let l = dag.add_node();
        all_names.push(fresh_latent_name(&all_names, &mut counter));
        dag.add_arc(l, r.a)?;
        dag.add_arc(l, r.b)?;
        latents.push(LatentNode {
            node: l,
            children: (r.a.min(r.b), r.a.max(r.b)),
        });
    }
    let mut cpdag = cpdag_with_names(&dag, all_names.clone());
    cpdag.latents = latents.clone();
    Ok(AugmentedResult {
        dag,
        names: all_names,
        latents,
        cpdag,
        skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Timings {
    pub learning: Duration,
    /// Everything after learning: triangles, filters, latents and CPDAG.
    pub post_learning: Duration,
}

/// Full pipeline output.
#[derive(Debug, Clone)]
pub struct Discovery {
    pub learnt: Dag,
    pub classifications: Vec<TriangleClassification>,
    /// Type 3 witnesses, aligned with `classifications`.
    pub filters: Vec<FilterOutcome>,
    pub result: AugmentedResult,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterOutcome {
    NotApplied,
    Type1 { parents_of_b: usize, kept: bool },
    Type3 { witness: Option<(usize, BTreeSet<usize>)> },
}

impl FilterOutcome {
    pub fn kept(&self) -> bool {
        match self {
            FilterOutcome::NotApplied => false,
            FilterOutcome::Type1 { kept, .. } => *kept,
            FilterOutcome::Type3 { witness } => witness.is_some(),
        }
    }
}

/// Triangles, filters and latent recreation on an already learnt DAG.
pub fn discover_on(
    g: &Dag,
    names: &[String],
    ctx: &ScoreContext,
    h: usize,
    alpha: f64,
) -> Result<(Vec<TriangleClassification>, Vec<FilterOutcome>, AugmentedResult)> {
    let triangles = enumerate_triangles(g);
    let classifications = triangles
        .par_iter()
        .map(|&t| classify_triangle(t, ctx, h, alpha))
        .collect::<Result<Vec<_>>>()?;
    let filters = classifications
        .iter()
        .map(|c| match c.verdict {
            Verdict::Type1 => {
                let r = c.roles.expect("latent verdicts carry roles");
                Ok(FilterOutcome::Type1 {
                    parents_of_b: g.parents(r.b).len(),
                    kept: filter_type1(c, g),
                })
            }
            Verdict::Type3 => Ok(FilterOutcome::Type3 {
                witness: filter_type3(c, g, ctx, h, alpha)?,
            }),
            Verdict::NotLatent => Ok(FilterOutcome::NotApplied),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut classifications = classifications;
    for (c, f) in classifications.iter_mut().zip(&filters) {
        if let FilterOutcome::Type3 { witness } = f {
            c.witness_d = witness.clone();
        }
    }
    let accepted: Vec<TriangleClassification> = classifications
        .iter()
        .zip(&filters)
        .filter(|(_, f)| f.kept())
        .map(|(c, _)| c.clone())
        .collect();
    let result = recreate_latents(g, names, &accepted)?;
    Ok((classifications, filters, result))
}

/// Learns a DAG, then looks for latent confounders among its triangles.
pub fn run_algorithm1(
    d: &Dataset,
    learner: &LearnerConfig,
    h: usize,
    alpha: f64,
) -> Result<Discovery> {
    let ctx = ScoreContext::new(d)?;
    let start = Instant::now();
    let learnt = learn_with(&ctx, learner)?;
    let learning = start.elapsed();
    let start = Instant::now();
    let (classifications, filters, result) = discover_on(&learnt, &d.names(), &ctx, h, alpha)?;
    let post_learning = start.elapsed();
    Ok(Discovery {
        learnt,
        classifications,
        filters,
        result,
        timings: Timings {
            learning,
            post_learning,
        },
    })
}
