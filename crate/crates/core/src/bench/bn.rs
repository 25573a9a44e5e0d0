use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, VariableMeta};
use crate::error::{Error, Result};
use crate::graphs::Dag;

const ROW_TOLERANCE: f64 = 1e-9;

/// A discrete Bayesian network.
///
/// `cpts[v]` holds one row of `|dom v|` probabilities per configuration of
/// `v`'s parents. Parents are taken in increasing id order, the first one
/// varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBayesNet {
    variables: Vec<VariableMeta>,
    dag: Dag,
    cpts: Vec<Vec<f64>>,
}

impl DiscreteBayesNet {
    pub fn new(variables: Vec<VariableMeta>, dag: Dag, cpts: Vec<Vec<f64>>) -> Result<Self> {
        let bn = DiscreteBayesNet {
            variables,
            dag,
            cpts,
        };
        bn.validate()?;
        Ok(bn)
    }

    fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        if self.dag.n_nodes() != n || self.cpts.len() != n {
            return Err(Error::InvalidModel(format!(
                "{} variables, {} graph nodes, {} tables",
                n,
                self.dag.n_nodes(),
                self.cpts.len()
            )));
        }
        for v in 0..n {
            self.variables[v].validate()?;
            let card = self.cardinality(v);
            let expected = self.n_parent_configs(v) * card;
            let name = &self.variables[v].name;
            if self.cpts[v].len() != expected {
                return Err(Error::InvalidModel(format!(
                    "table of `{name}` has {} entries, expected {expected}",
                    self.cpts[v].len()
                )));
            }
            for row in self.cpts[v].chunks(card) {
                let sum: f64 = row.iter().sum();
                if row.iter().any(|&p| !(0.0..=1.0 + ROW_TOLERANCE).contains(&p))
                    || (sum - 1.0).abs() > ROW_TOLERANCE
                {
                    return Err(Error::InvalidModel(format!(
                        "table of `{name}` has a row that is not a distribution"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[VariableMeta] {
        &self.variables
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn cardinality(&self, v: usize) -> usize {
        self.variables[v].cardinality()
    }

    pub fn names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownName(name.to_owned()))
    }

    pub fn parents(&self, v: usize) -> Vec<usize> {
        self.dag.parents(v).iter().copied().collect()
    }

    pub fn n_parent_configs(&self, v: usize) -> usize {
        self.dag.parents(v).iter().map(|&p| self.cardinality(p)).product()
    }

    pub fn cpt(&self, v: usize) -> &[f64] {
        &self.cpts[v]
    }

    /// Row index of a parent configuration given the full assignment.
    pub fn config_index(&self, v: usize, assignment: &[usize]) -> usize {
        self.dag
            .parents(v)
            .iter()
            .fold(0, |acc, &p| acc * self.cardinality(p) + assignment[p])
    }

    /// `P(v | parents)` for one parent configuration.
    pub fn row(&self, v: usize, config: usize) -> &[f64] {
        let card = self.cardinality(v);
        &self.cpts[v][config * card..(config + 1) * card]
    }

    /// Adds a parentless node and returns its id.
    pub fn add_root(&mut self, var: VariableMeta, prior: Vec<f64>) -> Result<usize> {
        var.validate()?;
        if prior.len() != var.cardinality() {
            return Err(Error::InvalidModel("prior length differs from domain size".into()));
        }
        if self.variables.iter().any(|v| v.name == var.name) {
            return Err(Error::InvalidModel(format!("duplicate variable `{}`", var.name)));
        }
        self.variables.push(var);
        self.cpts.push(prior);
        let id = self.dag.add_node();
        self.validate()?;
        Ok(id)
    }

    /// Replaces the parents of `v` and its table in one step.
    pub fn set_family(&mut self, v: usize, parents: &[usize], cpt: Vec<f64>) -> Result<()> {
        let mut dag = self.dag.clone();
        for p in self.parents(v) {
            dag.remove_arc(p, v)?;
        }
        for &p in parents {
            dag.add_arc(p, v)?;
        }
        let old_dag = std::mem::replace(&mut self.dag, dag);
        let old_cpt = std::mem::replace(&mut self.cpts[v], cpt);
        if let Err(e) = self.validate() {
            self.dag = old_dag;
            self.cpts[v] = old_cpt;
            return Err(e);
        }
        Ok(())
    }

    /// Ancestral sampling of `n` rows; columns follow node ids.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let order = self.dag.topological_order();
        let k = self.n_nodes();
        let mut columns = vec![Vec::with_capacity(n); k];
        let mut assignment = vec![0usize; k];
        for _ in 0..n {
            for &v in &order {
                let row = self.row(v, self.config_index(v, &assignment));
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut x = row.len() - 1;
                for (i, &p) in row.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        x = i;
                        break;
                    }
                }
                assignment[v] = x;
            }
            for v in 0..k {
                columns[v].push(assignment[v] as u16);
            }
        }
        Dataset::new(self.variables.clone(), columns)
    }

    pub fn to_json(&self) -> BayesNetJson {
        let names = self.names();
        BayesNetJson {
            variables: self.variables.clone(),
            arcs: self
                .dag
                .arcs()
                .into_iter()
                .map(|(u, v)| [names[u].clone(), names[v].clone()])
                .collect(),
            cpts: names.iter().cloned().zip(self.cpts.iter().cloned()).collect(),
        }
    }

    pub fn from_json(j: &BayesNetJson) -> Result<Self> {
        let index = |name: &str| {
            j.variables
                .iter()
                .position(|v| v.name == name)
                .ok_or_else(|| Error::UnknownName(name.to_owned()))
        };
        let mut dag = Dag::new(j.variables.len());
        for [u, v] in &j.arcs {
            dag.add_arc(index(u)?, index(v)?)?;
        }
        let cpts = j
            .variables
            .iter()
            .map(|v| {
                j.cpts
                    .get(&v.name)
                    .cloned()
                    .ok_or_else(|| Error::InvalidModel(format!("no table for `{}`", v.name)))
            })
            .collect::<Result<Vec<_>>>()?;
        DiscreteBayesNet::new(j.variables.clone(), dag, cpts)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        DiscreteBayesNet::from_json(&serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&self.to_json())?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// On-disk network:
/// `{"variables": [{"name", "states"}], "arcs": [[parent, child]], "cpts": {"node": [...]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesNetJson {
    pub variables: Vec<VariableMeta>,
    pub arcs: Vec<[String; 2]>,
    pub cpts: BTreeMap<String, Vec<f64>>,
}
