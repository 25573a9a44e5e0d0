use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{AugmentedResult, Discovery, FilterOutcome, Verdict};
use crate::graphs::{DagJson, LatentJson, PdagJson};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleJson {
    /// `[source, middle, sink]`.
    pub nodes: [String; 3],
    pub verdict: Verdict,
    /// `[A, B, C]` for latent verdicts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roles: Option<[String; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_d: Option<(String, Vec<String>)>,
    pub accepted: bool,
}

/// On-disk form of a discovery run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedResultJson {
    pub dag: DagJson,
    pub latents: Vec<LatentJson>,
    pub cpdag: PdagJson,
    pub triangles: Vec<TriangleJson>,
}

fn named(names: &[String], set: &BTreeSet<usize>) -> Vec<String> {
    set.iter().map(|&x| names[x].clone()).collect()
}

impl AugmentedResult {
    pub fn to_json(&self) -> AugmentedResultJson {
        let cpdag = self.cpdag.to_json();
        AugmentedResultJson {
            dag: DagJson::from_dag(&self.dag, &self.names),
            latents: cpdag.latents.clone(),
            cpdag,
            triangles: Vec::new(),
        }
    }
}

impl Discovery {
    pub fn to_json(&self) -> AugmentedResultJson {
        let names = &self.result.names;
        let mut out = self.result.to_json();
        out.triangles = self
            .classifications
            .iter()
            .zip(&self.filters)
            .map(|(c, f)| {
                let t = c.triangle;
                TriangleJson {
                    nodes: [
                        names[t.source].clone(),
                        names[t.middle].clone(),
                        names[t.sink].clone(),
                    ],
                    verdict: c.verdict,
                    roles: c
                        .roles
                        .map(|r| [names[r.a].clone(), names[r.b].clone(), names[r.c].clone()]),
                    witness: c.witness.as_ref().map(|z| named(names, z)),
                    witness_d: c
                        .witness_d
                        .as_ref()
                        .map(|(d, z)| (names[*d].clone(), named(names, z))),
                    accepted: f.kept() && !self.result.skipped.contains(&t),
                }
            })
            .collect();
        out
    }

    /// Plain-text summary: one block per triangle, then the latents.
    pub fn report(&self) -> String {
        let names = &self.result.names;
        let set = |z: &BTreeSet<usize>| format!("{{{}}}", named(names, z).join(", "));
        let mut s = String::new();
        let _ = writeln!(
            s,
            "learnt DAG: {} arcs, {} triangles",
            self.learnt.n_arcs(),
            self.classifications.len()
        );
        for (c, f) in self.classifications.iter().zip(&self.filters) {
            let t = c.triangle;
            let _ = writeln!(
                s,
                "triangle {} -> {} -> {}, {} -> {}",
                names[t.source], names[t.middle], names[t.sink], names[t.source], names[t.sink]
            );
            for p in &c.checks {
                let (u, v) = p.pair;
                let sep = if p.search.found {
                    set(&p.search.z)
                } else {
                    "none".to_string()
                };
                let third = match p.with_third {
                    Some(w) if w.independent => " (still independent with third)",
                    Some(_) => " (dependent with third)",
                    None => "",
                };
                let _ = writeln!(s, "  {} / {}: separator {sep}{third}", names[u], names[v]);
            }
            let verdict = match c.verdict {
                Verdict::Type1 => "type 1",
                Verdict::Type3 => "type 3",
                Verdict::NotLatent => "not latent",
            };
            let filter = match f {
                FilterOutcome::NotApplied => String::new(),
                FilterOutcome::Type1 { parents_of_b, kept } => {
                    format!(", B has {parents_of_b} parents, {}", if *kept { "kept" } else { "dropped" })
                }
                FilterOutcome::Type3 { witness: Some((d, z)) } => {
                    format!(", kept via {} with {}", names[*d], set(z))
                }
                FilterOutcome::Type3 { witness: None } => ", dropped: no neighbour of B separable".into(),
            };
            let _ = writeln!(s, "  verdict: {verdict}{filter}");
            if self.result.skipped.contains(&t) {
                let _ = writeln!(s, "  skipped: arcs already replaced by an earlier latent");
            }
        }
        for l in &self.result.latents {
            let _ = writeln!(
                s,
                "latent {} -> {}, {}",
                names[l.node], names[l.children.0], names[l.children.1]
            );
        }
        if self.result.latents.is_empty() {
            let _ = writeln!(s, "no latent confounder found");
        }
        s
    }
}
