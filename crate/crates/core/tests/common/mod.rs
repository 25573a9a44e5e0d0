#![allow(dead_code)]

use std::collections::BTreeSet;

use confound::bench::DiscreteBayesNet;
use confound::{Dag, Dataset, VariableMeta};
use rand::Rng;
use rand_distr::{Distribution, Gamma};

/// Every labelled DAG on `n` nodes.
pub fn all_dags(n: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    let mut out = Vec::new();
    let total = 3usize.pow(pairs.len() as u32);
    'next: for mut code in 0..total {
        let mut arcs = Vec::new();
        for &(u, v) in &pairs {
            match code % 3 {
                1 => arcs.push((u, v)),
                2 => arcs.push((v, u)),
                _ => {}
            }
            code /= 3;
        }
        let mut g = Dag::new(n);
        for (u, v) in arcs {
            if g.add_arc(u, v).is_err() {
                continue 'next;
            }
        }
        out.push(g);
    }
    out
}

/// Random DAG: a random node order, each forward pair linked with probability `p`.
pub fn random_dag(rng: &mut impl Rng, n: usize, p: f64) -> Dag {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut g = Dag::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                g.add_arc(order[i], order[j]).unwrap();
            }
        }
    }
    g
}

pub fn dirichlet(rng: &mut impl Rng, k: usize, conc: f64) -> Vec<f64> {
    let g = Gamma::new(conc, 1.0).unwrap();
    let xs: Vec<f64> = (0..k).map(|_| g.sample(rng).max(1e-12)).collect();
    let s: f64 = xs.iter().sum();
    xs.into_iter().map(|x| x / s).collect()
}

/// Network over `dag` with the given cardinalities and Dirichlet tables.
pub fn random_bn(rng: &mut impl Rng, dag: Dag, cards: &[usize], conc: f64) -> DiscreteBayesNet {
    let vars: Vec<VariableMeta> = cards
        .iter()
        .enumerate()
        .map(|(i, &c)| VariableMeta::with_cardinality(format!("X{i}"), c))
        .collect();
    let cpts = (0..cards.len())
        .map(|v| {
            let configs: usize = dag.parents(v).iter().map(|&p| cards[p]).product();
            (0..configs).flat_map(|_| dirichlet(rng, cards[v], conc)).collect()
        })
        .collect();
    DiscreteBayesNet::new(vars, dag, cpts).unwrap()
}

pub fn set(xs: &[usize]) -> BTreeSet<usize> {
    xs.iter().copied().collect()
}

/// All subsets of `items`.
pub fn subsets(items: &[usize]) -> Vec<BTreeSet<usize>> {
    (0..1usize << items.len())
        .map(|m| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| m >> i & 1 == 1)
                .map(|(_, &x)| x)
                .collect()
        })
        .collect()
}

/// `2 Σ N(u,v,z) ln(N(u,v,z) N(z) / (N(u,z) N(v,z)))` by direct counting.
pub fn direct_g2(d: &Dataset, u: usize, v: usize, z: &[usize]) -> f64 {
    use std::collections::HashMap;
    let mut uvz: HashMap<(u16, u16, Vec<u16>), f64> = HashMap::new();
    let mut uz: HashMap<(u16, Vec<u16>), f64> = HashMap::new();
    let mut vz: HashMap<(u16, Vec<u16>), f64> = HashMap::new();
    let mut zz: HashMap<Vec<u16>, f64> = HashMap::new();
    for r in 0..d.n_rows() {
        let key: Vec<u16> = z.iter().map(|&x| d.column(x)[r]).collect();
        let (a, b) = (d.column(u)[r], d.column(v)[r]);
        *uvz.entry((a, b, key.clone())).or_default() += 1.0;
        *uz.entry((a, key.clone())).or_default() += 1.0;
        *vz.entry((b, key.clone())).or_default() += 1.0;
        *zz.entry(key).or_default() += 1.0;
    }
    2.0 * uvz
        .iter()
        .map(|((a, b, k), &n)| n * (n * zz[k] / (uz[&(*a, k.clone())] * vz[&(*b, k.clone())])).ln())
        .sum::<f64>()
}
