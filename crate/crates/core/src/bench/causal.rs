//! Functional causal models with discrete disturbances.

use super::DiscreteBayesNet;
use crate::data::VariableMeta;
use crate::error::{Error, Result};
use crate::graphs::Dag;

/// Each `X_i = f_i(Pa(X_i), ξ_i)` with an independent disturbance `ξ_i`.
///
/// `functions[v][c * |ξ_v| + e]` is the state of `v` for parent configuration
/// `c` (same layout as network tables) and disturbance value `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalModel {
    pub variables: Vec<VariableMeta>,
    pub dag: Dag,
    pub disturbances: Vec<Vec<f64>>,
    pub functions: Vec<Vec<usize>>,
}

impl CausalModel {
    /// Tabulates `f(v, parent_states, e)`; parent states follow increasing ids.
    pub fn from_fn(
        variables: Vec<VariableMeta>,
        dag: Dag,
        disturbances: Vec<Vec<f64>>,
        f: impl Fn(usize, &[usize], usize) -> usize,
    ) -> Result<Self> {
        if disturbances.len() != variables.len() || dag.n_nodes() != variables.len() {
            return Err(Error::InvalidModel("sizes of variables, graph and disturbances differ".into()));
        }
        let functions = (0..variables.len())
            .map(|v| {
                let parents: Vec<usize> = dag.parents(v).iter().copied().collect();
                let cards: Vec<usize> = parents.iter().map(|&p| variables[p].cardinality()).collect();
                let n_configs: usize = cards.iter().product();
                let mut table = Vec::with_capacity(n_configs * disturbances[v].len());
                let mut states = vec![0usize; parents.len()];
                for _ in 0..n_configs {
                    for e in 0..disturbances[v].len() {
                        table.push(f(v, &states, e));
                    }
                    for i in (0..states.len()).rev() {
                        states[i] += 1;
                        if states[i] < cards[i] {
                            break;
                        }
                        states[i] = 0;
                    }
                }
                table
            })
            .collect();
        let cm = CausalModel {
            variables,
            dag,
            disturbances,
            functions,
        };
        cm.validate()?;
        Ok(cm)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        if self.dag.n_nodes() != n || self.disturbances.len() != n || self.functions.len() != n {
            return Err(Error::InvalidModel("sizes of variables, graph and tables differ".into()));
        }
        for v in 0..n {
            let name = &self.variables[v].name;
            let xi = &self.disturbances[v];
            if xi.is_empty()
                || xi.iter().any(|&p| p < 0.0)
                || (xi.iter().sum::<f64>() - 1.0).abs() > 1e-9
            {
                return Err(Error::InvalidModel(format!(
                    "disturbance of `{name}` is not a distribution"
                )));
            }
            let configs: usize = self
                .dag
                .parents(v)
                .iter()
                .map(|&p| self.variables[p].cardinality())
                .product();
            let card = self.variables[v].cardinality();
            if self.functions[v].len() != configs * xi.len()
                || self.functions[v].iter().any(|&x| x >= card)
            {
                return Err(Error::InvalidModel(format!("malformed function table for `{name}`")));
            }
        }
        Ok(())
    }

    /// The 0/1 table `P(X_v | Pa(X_v), ξ_v)`, rows over `(config, e)`.
    pub fn deterministic_table(&self, v: usize) -> Vec<f64> {
        let card = self.variables[v].cardinality();
        let mut out = vec![0.0; self.functions[v].len() * card];
        for (row, &x) in self.functions[v].iter().enumerate() {
            out[row * card + x] = 1.0;
        }
        out
    }
}

/// Marginalizes every disturbance: `P(x | pa) = Σ_e P(ξ = e) [f(pa, e) = x]`.
pub fn causal_model_to_bn(cm: &CausalModel) -> Result<DiscreteBayesNet> {
    cm.validate()?;
    let cpts = (0..cm.variables.len())
        .map(|v| {
            let card = cm.variables[v].cardinality();
            let xi = &cm.disturbances[v];
            let configs = cm.functions[v].len() / xi.len();
            let mut cpt = vec![0.0; configs * card];
            for c in 0..configs {
                for (e, &p) in xi.iter().enumerate() {
                    cpt[c * card + cm.functions[v][c * xi.len() + e]] += p;
                }
            }
            cpt
        })
        .collect();
    DiscreteBayesNet::new(cm.variables.clone(), cm.dag.clone(), cpts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_disturbance_gives_its_slice() {
        // X = Y when ξ = 0, X = 1 - Y when ξ = 1
        let vars = vec![
            VariableMeta::with_cardinality("Y", 2),
            VariableMeta::with_cardinality("X", 2),
        ];
        let dag = Dag::from_arcs(2, &[(0, 1)]).unwrap();
        let cm = CausalModel::from_fn(vars, dag, vec![vec![0.5, 0.5], vec![1.0, 0.0]], |v, pa, e| {
            if v == 0 {
                e
            } else if e == 0 {
                pa[0]
            } else {
                1 - pa[0]
            }
        })
        .unwrap();
        let bn = causal_model_to_bn(&cm).unwrap();
        assert_eq!(bn.cpt(1), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(bn.cpt(0), &[0.5, 0.5]);
        let slice: Vec<f64> = cm
            .deterministic_table(1)
            .chunks(2)
            .step_by(2)
            .flatten()
            .copied()
            .collect();
        assert_eq!(slice, bn.cpt(1));
    }

    #[test]
    fn malformed_function_rejected() {
        let vars = vec![VariableMeta::with_cardinality("X", 2)];
        let cm = CausalModel {
            variables: vars,
            dag: Dag::new(1),
            disturbances: vec![vec![0.5, 0.5]],
            functions: vec![vec![0, 2]],
        };
        assert!(causal_model_to_bn(&cm).is_err());
    }
}
