//! Planting latent confounders into a known network.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};

use super::infer::mutual_information;
use super::DiscreteBayesNet;
use crate::data::VariableMeta;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct InjectionConfig {
    pub n_confounders: usize,
    pub latent_cardinality: usize,
    /// Common Dirichlet hyperparameter of the random part of each row.
    pub dirichlet: f64,
    /// Range of the weight given to the point mass in each row.
    pub dirac_weight: (f64, f64),
    pub max_attempts: usize,
    pub seed: u64,
}

impl Default for InjectionConfig {
    fn default() -> Self {
        InjectionConfig {
            n_confounders: 2,
            latent_cardinality: 2,
            dirichlet: 4.0,
            dirac_weight: (2.0 / 3.0, 5.0 / 6.0),
            max_attempts: 200,
            seed: 0,
        }
    }
}

impl InjectionConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.dirac_weight;
        if !(0.0 < lo && lo <= hi && hi < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "dirac weight range [{lo}, {hi}] not inside (0, 1)"
            )));
        }
        if self.latent_cardinality < 2 {
            return Err(Error::InvalidArgument("latent domain needs two states".into()));
        }
        if self.dirichlet.is_nan() || self.dirichlet <= 0.0 {
            return Err(Error::InvalidArgument("dirichlet hyperparameter must be positive".into()));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidArgument("max_attempts must be at least 1".into()));
        }
        Ok(())
    }
}

/// A planted confounder: its node id and its two children (smaller id first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedLatent {
    pub node: usize,
    pub children: (usize, usize),
}

/// The network with its latents and the thresholds their children had to beat.
#[derive(Debug, Clone)]
pub struct Injection {
    pub bn: DiscreteBayesNet,
    pub latents: Vec<PlantedLatent>,
    pub mi_threshold: f64,
    pub cmi_threshold: f64,
}

impl Injection {
    pub fn is_latent(&self, v: usize) -> bool {
        self.latents.iter().any(|l| l.node == v)
    }

    /// Ids of the observed nodes, in increasing order.
    pub fn observed(&self) -> BTreeSet<usize> {
        (0..self.bn.n_nodes()).filter(|&v| !self.is_latent(v)).collect()
    }

    /// Children of every latent, as names.
    pub fn child_pairs(&self) -> Vec<(String, String)> {
        let names = self.bn.names();
        self.latents
            .iter()
            .map(|l| (names[l.children.0].clone(), names[l.children.1].clone()))
            .collect()
    }
}

fn union_parents(bn: &DiscreteBayesNet, a: usize, b: usize, skip: &[usize]) -> Vec<usize> {
    bn.dag()
        .parents(a)
        .iter()
        .chain(bn.dag().parents(b))
        .copied()
        .filter(|p| *p != a && *p != b && !skip.contains(p))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Average `I(A; B)` and `I(A; B | Pa(A) ∪ Pa(B))` over the pairs that share a
/// parent.
pub fn mi_thresholds(bn: &DiscreteBayesNet) -> Result<(f64, f64)> {
    let n = bn.n_nodes();
    let mut mi = Vec::new();
    let mut cmi = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if bn.dag().parents(a).is_disjoint(bn.dag().parents(b)) {
                continue;
            }
            mi.push(mutual_information(bn, a, b, &[])?);
            cmi.push(mutual_information(bn, a, b, &union_parents(bn, a, b, &[]))?);
        }
    }
    let mean = |v: &[f64]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    Ok((mean(&mi), mean(&cmi)))
}

fn draw_table(
    rows: usize,
    card: usize,
    cfg: &InjectionConfig,
    dirichlet: &Dirichlet<f64>,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * card);
    for _ in 0..rows {
        let w = rng.gen_range(cfg.dirac_weight.0..=cfg.dirac_weight.1);
        let atom = rng.gen_range(0..card);
        let noise = dirichlet.sample(rng);
        out.extend((0..card).map(|x| w * f64::from(u8::from(x == atom)) + (1.0 - w) * noise[x]));
    }
    out
}

/// Adds `cfg.n_confounders` parentless latents, each with two observed
/// children that are not adjacent, not already confounded, and have one or two
/// observed parents. The children's tables are redrawn until their mutual
/// information and their conditional mutual information given their observed
/// parents both exceed the averages of the original network.
pub fn inject_confounders(base: &DiscreteBayesNet, cfg: &InjectionConfig) -> Result<Injection> {
    cfg.validate()?;
    let (mi_threshold, cmi_threshold) = if cfg.n_confounders > 0 {
        mi_thresholds(base)?
    } else {
        (0.0, 0.0)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut bn = base.clone();
    let mut latents: Vec<PlantedLatent> = Vec::new();
    let n_base = base.n_nodes();

    for index in 0..cfg.n_confounders {
        let is_latent = |v: usize| latents.iter().any(|l| l.node == v);
        let taken: BTreeSet<usize> = latents
            .iter()
            .flat_map(|l| [l.children.0, l.children.1])
            .collect();
        let observed_parents =
            |v: usize| bn.dag().parents(v).iter().filter(|&&p| !is_latent(p)).count();
        let eligible: Vec<usize> = (0..n_base)
            .filter(|&v| !taken.contains(&v) && (1..=2).contains(&observed_parents(v)))
            .collect();
        let pairs: Vec<(usize, usize)> = eligible
            .iter()
            .flat_map(|&a| eligible.iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| a < b && !bn.dag().adjacent(a, b))
            .collect();
        let &(a, b) = pairs.choose(&mut rng).ok_or(Error::NoEligiblePair(index))?;

        let mut name_index = index + 1;
        let name = loop {
            let name = format!("L{name_index}");
            if bn.index_of(&name).is_err() {
                break name;
            }
            name_index += 1;
        };
        let k = cfg.latent_cardinality;
        let l = bn.add_root(VariableMeta::with_cardinality(name, k), vec![1.0 / k as f64; k])?;
        let latent_ids: Vec<usize> = latents.iter().map(|x| x.node).chain([l]).collect();
        let given = union_parents(&bn, a, b, &latent_ids);

        let mut admitted = false;
        for _ in 0..cfg.max_attempts {
            for child in [a, b] {
                let mut parents = bn.parents(child);
                if !parents.contains(&l) {
                    parents.push(l);
                }
                let rows: usize = parents.iter().map(|&p| bn.cardinality(p)).product();
                let card = bn.cardinality(child);
                let dirichlet = Dirichlet::new(&vec![cfg.dirichlet; card])
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?;
                let table = draw_table(rows, card, cfg, &dirichlet, &mut rng);
                bn.set_family(child, &parents, table)?;
            }
            let mi = mutual_information(&bn, a, b, &[])?;
            let cmi = mutual_information(&bn, a, b, &given)?;
            if mi > mi_threshold && cmi > cmi_threshold {
                admitted = true;
                break;
            }
        }
        if !admitted {
            return Err(Error::InjectionExhausted {
                index,
                attempts: cfg.max_attempts,
            });
        }
        latents.push(PlantedLatent {
            node: l,
            children: (a, b),
        });
    }
    Ok(Injection {
        bn,
        latents,
        mi_threshold,
        cmi_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::Dag;

    // X0 -> X1, X0 -> X2, X3 -> X4, X3 -> X5, with dependent tables
    fn forks() -> DiscreteBayesNet {
        let vars = (0..6)
            .map(|i| VariableMeta::with_cardinality(format!("X{i}"), 2))
            .collect();
        let dag = Dag::from_arcs(6, &[(0, 1), (0, 2), (3, 4), (3, 5)]).unwrap();
        let noisy = vec![0.8, 0.2, 0.25, 0.75];
        DiscreteBayesNet::new(
            vars,
            dag,
            vec![
                vec![0.5, 0.5],
                noisy.clone(),
                noisy.clone(),
                vec![0.4, 0.6],
                noisy.clone(),
                noisy,
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_confounders_is_identity() {
        let bn = forks();
        let cfg = InjectionConfig {
            n_confounders: 0,
            ..InjectionConfig::default()
        };
        let out = inject_confounders(&bn, &cfg).unwrap();
        assert_eq!(out.bn, bn);
        assert!(out.latents.is_empty());
    }

    #[test]
    fn two_latents_on_disjoint_children() {
        let bn = forks();
        let cfg = InjectionConfig {
            seed: 5,
            ..InjectionConfig::default()
        };
        let out = inject_confounders(&bn, &cfg).unwrap();
        assert_eq!(out.latents.len(), 2);
        assert_eq!(out.bn.n_nodes(), 8);
        let mut children = BTreeSet::new();
        for l in &out.latents {
            assert!(out.bn.dag().parents(l.node).is_empty());
            assert_eq!(out.bn.dag().children(l.node).len(), 2);
            let (a, b) = l.children;
            assert!(!out.bn.dag().adjacent(a, b));
            assert!(children.insert(a) && children.insert(b));
            assert!((2..=3).contains(&out.bn.dag().parents(a).len()));
            let mi = mutual_information(&out.bn, a, b, &[]).unwrap();
            assert!(mi > out.mi_threshold);
        }
        assert_eq!(out.observed().len(), 6);
    }

    #[test]
    fn latent_domain_size_shapes_tables() {
        let cfg = InjectionConfig {
            n_confounders: 1,
            latent_cardinality: 4,
            seed: 9,
            ..InjectionConfig::default()
        };
        let out = inject_confounders(&forks(), &cfg).unwrap();
        let l = &out.latents[0];
        assert_eq!(out.bn.cardinality(l.node), 4);
        let child = l.children.0;
        assert_eq!(out.bn.n_parent_configs(child), 2 * 4);
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = InjectionConfig {
            seed: 3,
            ..InjectionConfig::default()
        };
        let a = inject_confounders(&forks(), &cfg).unwrap();
        let b = inject_confounders(&forks(), &cfg).unwrap();
        assert_eq!(a.bn, b.bn);
    }

    #[test]
    fn runs_out_of_pairs() {
        let cfg = InjectionConfig {
            n_confounders: 3,
            ..InjectionConfig::default()
        };
        // only X1, X2, X4, X5 are eligible, so two latents at most
        assert!(matches!(
            inject_confounders(&forks(), &cfg),
            Err(Error::NoEligiblePair(2))
        ));
    }
}
