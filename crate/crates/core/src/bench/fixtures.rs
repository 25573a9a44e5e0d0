//! Small hand-built models used by tests, examples and the CLI.

use super::{CausalModel, DiscreteBayesNet};
use crate::data::VariableMeta;
use crate::graphs::Dag;

fn var(name: &str, states: &[&str]) -> VariableMeta {
    VariableMeta::new(name, states.iter().map(|s| s.to_string()).collect())
}

/// Six-variable causal model over `A..F` with arcs `A -> C`, `B -> C`,
/// `B -> D`, `C -> E`, `D -> E`, `E -> F` and disturbances on `{1, 2, 3, 4}`
/// (index `e` stands for the value `e + 1`).
///
/// `C` copies `A` or `B`, so its domain is `{a1, a2, b1, b2}`.
pub fn six_node_causal_model() -> CausalModel {
    let (a, b, c, d, e, f) = (0, 1, 2, 3, 4, 5);
    let variables = vec![
        var("A", &["a1", "a2"]),
        var("B", &["b1", "b2"]),
        var("C", &["a1", "a2", "b1", "b2"]),
        var("D", &["d1", "d2", "d3"]),
        var("E", &["e1", "e2", "e3"]),
        var("F", &["f1", "f2", "f3"]),
    ];
    let dag = Dag::from_arcs(6, &[(a, c), (b, c), (b, d), (c, e), (d, e), (e, f)])
        .expect("acyclic by construction");
    let disturbances = vec![
        vec![0.2, 0.1, 0.3, 0.4],
        vec![0.2, 0.4, 0.3, 0.1],
        vec![0.3, 0.3, 0.2, 0.2],
        vec![0.5, 0.3, 0.1, 0.1],
        vec![0.1, 0.2, 0.3, 0.4],
        vec![0.2, 0.3, 0.3, 0.2],
    ];
    CausalModel::from_fn(variables, dag, disturbances, |v, pa, k| {
        let xi = k + 1;
        match v {
            0 => usize::from(xi > 2),
            1 => usize::from(xi % 2 != 0),
            // pa = [A, B]; C's states list A's values first
            2 => {
                if xi <= 2 {
                    pa[0]
                } else {
                    2 + pa[1]
                }
            }
            // pa = [B]
            3 => match (pa[0], xi) {
                (0, x) if x % 2 == 1 => 0,
                (1, 2) => 1,
                _ => 2,
            },
            // pa = [C, D]; C in {a1, b1} is state 0 or 2
            4 => {
                let first = pa[0] == 0 || pa[0] == 2;
                if first && xi <= 2 {
                    0
                } else if !first && pa[1] == 1 {
                    1
                } else {
                    2
                }
            }
            // pa = [E]
            _ => match (pa[0], xi) {
                (_, 1) => 0,
                (0 | 2, 2) => 1,
                _ => 2,
            },
        }
    })
    .expect("well-formed by construction")
}

/// Ids of [`confounded_pair_network`]'s nodes.
pub const PAIR_A: usize = 0;
pub const PAIR_B: usize = 1;
pub const PAIR_C: usize = 2;
pub const PAIR_D: usize = 3;
pub const PAIR_L: usize = 4;

/// Binary network `C -> A <- L -> B <- D` in which `L` is meant to stay
/// hidden. `A` and `B` both depend strongly on `L`, and `A` also on `C`, so a
/// learner that only sees `A, B, C, D` tends to add `A -> B` and `C -> B`.
pub fn confounded_pair_network() -> DiscreteBayesNet {
    let variables = ["A", "B", "C", "D", "L"]
        .iter()
        .map(|n| VariableMeta::with_cardinality(*n, 2))
        .collect();
    let dag = Dag::from_arcs(
        5,
        &[(PAIR_C, PAIR_A), (PAIR_L, PAIR_A), (PAIR_L, PAIR_B), (PAIR_D, PAIR_B)],
    )
    .expect("acyclic by construction");
    let bernoulli = |ps: &[f64]| ps.iter().flat_map(|&p| [1.0 - p, p]).collect::<Vec<_>>();
    let cpts = vec![
        // A | C, L
        bernoulli(&[0.05, 0.8, 0.7, 0.95]),
        // B | D, L
        bernoulli(&[0.1, 0.85, 0.5, 0.95]),
        bernoulli(&[0.5]),
        bernoulli(&[0.5]),
        bernoulli(&[0.5]),
    ];
    DiscreteBayesNet::new(variables, dag, cpts).expect("valid tables")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::causal_model_to_bn;

    #[test]
    fn six_node_conversion() {
        let bn = causal_model_to_bn(&six_node_causal_model()).unwrap();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
        assert!(close(bn.cpt(0), &[0.3, 0.7]));
        assert!(close(bn.cpt(1), &[0.5, 0.5]));
        assert!(close(bn.row(3, 0), &[0.6, 0.0, 0.4]));
        assert!(close(bn.row(3, 1), &[0.0, 0.3, 0.7]));
        assert!(close(bn.row(2, 0), &[0.6, 0.0, 0.4, 0.0]));
        assert!(close(bn.row(5, 1), &[0.2, 0.0, 0.8]));
    }

    #[test]
    fn pair_network_shape() {
        let bn = confounded_pair_network();
        assert_eq!(bn.dag().n_arcs(), 4);
        assert!(bn.dag().parents(PAIR_L).is_empty());
        assert_eq!(bn.dag().children(PAIR_L).len(), 2);
    }
}
