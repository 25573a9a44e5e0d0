//! BIC local scores, the f_BIC independence statistic and χ² critical values.
//!
//! All log-likelihoods are assembled from memoized `Σ N ln N` terms over
//! variable subsets: for a child `X` and parent set `Z`,
//!
//! ```text
//! Σ_{x,z} N_xz ln(N_xz / N_z) = Σ_{x,z} N_xz ln N_xz − Σ_z N_z ln N_z
//! ```
//!
//! so one counting pass over a subset serves every score that touches it.

mod chi2;

use std::collections::{BTreeSet, HashMap};
use std::sync::RwLock;

pub use chi2::{chi2_critical, chi2_sf, gamma_q, ln_gamma};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graphs::Dag;

/// Likelihood-ratio statistic and its degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GTest {
    pub statistic: f64,
    pub dof: u64,
}

/// Outcome of one conditional independence test; `independent` holds iff
/// `statistic < critical`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndepVerdict {
    pub statistic: f64,
    pub dof: u64,
    pub critical: f64,
    pub independent: bool,
}

type VerdictKey = (usize, usize, Vec<usize>, u64);

/// BIC evaluator over one dataset with memoized intermediate counts.
///
/// Safe to share across threads; concurrent inserts of the same key write the
/// same value.
pub struct ScoreContext<'a> {
    data: &'a Dataset,
    ln_n: f64,
    n_log_n: RwLock<HashMap<Vec<usize>, f64>>,
    scores: RwLock<HashMap<(usize, Vec<usize>), f64>>,
    criticals: RwLock<HashMap<(u64, u64), f64>>,
    verdicts: RwLock<HashMap<VerdictKey, IndepVerdict>>,
}

impl<'a> ScoreContext<'a> {
    pub fn new(data: &'a Dataset) -> Result<Self> {
        if data.n_rows() == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(ScoreContext {
            data,
            ln_n: (data.n_rows() as f64).ln(),
            n_log_n: RwLock::new(HashMap::new()),
            scores: RwLock::new(HashMap::new()),
            criticals: RwLock::new(HashMap::new()),
            verdicts: RwLock::new(HashMap::new()),
        })
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    /// `ln |D|`.
    pub fn ln_n(&self) -> f64 {
        self.ln_n
    }

    pub fn n_variables(&self) -> usize {
        self.data.n_variables()
    }

    fn canonical(&self, exclude: &[usize], z: &[usize]) -> Result<Vec<usize>> {
        for &x in exclude {
            self.data.check_id(x)?;
        }
        let mut z = z.to_vec();
        z.sort_unstable();
        for w in z.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateVariable(w[0]));
            }
        }
        for &x in &z {
            self.data.check_id(x)?;
            if exclude.contains(&x) {
                return Err(Error::ChildInParents(x));
            }
        }
        Ok(z)
    }

    /// Memoized `Σ N ln N` over the joint configurations of a sorted set.
    fn n_log_n(&self, vars: &[usize]) -> f64 {
        if let Some(&v) = self.n_log_n.read().unwrap().get(vars) {
            return v;
        }
        let v = self.data.n_log_n(vars);
        self.n_log_n.write().unwrap().insert(vars.to_vec(), v);
        v
    }

    fn with(sorted: &[usize], x: usize) -> Vec<usize> {
        let mut out = sorted.to_vec();
        let pos = out.partition_point(|&y| y < x);
        out.insert(pos, x);
        out
    }

    /// `(|dom X| − 1) · Π |dom Z_i|`, over the full Cartesian product.
    pub fn dim(&self, x: usize, z: &[usize]) -> f64 {
        let q: f64 = z.iter().map(|&p| self.data.cardinality(p) as f64).product();
        (self.data.cardinality(x) as f64 - 1.0) * q
    }

    fn compute_bic(&self, x: usize, z: &[usize], lookup: impl Fn(&[usize]) -> f64) -> f64 {
        let ll = lookup(&Self::with(z, x)) - lookup(z);
        ll - 0.5 * self.ln_n * self.dim(x, z)
    }

    /// `S(X | Z) = Σ N_xz ln(N_xz / N_z) − ½ ln|D| · dim(X | Z)`.
    pub fn bic(&self, x: usize, z: &[usize]) -> Result<f64> {
        let z = self.canonical(&[x], z)?;
        let key = (x, z);
        if let Some(&s) = self.scores.read().unwrap().get(&key) {
            return Ok(s);
        }
        let s = self.compute_bic(x, &key.1, |vars| self.n_log_n(vars));
        self.scores.write().unwrap().insert(key, s);
        Ok(s)
    }

    /// Same computation as [`bic`](Self::bic) without touching any cache.
    pub fn bic_uncached(&self, x: usize, z: &[usize]) -> Result<f64> {
        let z = self.canonical(&[x], z)?;
        Ok(self.compute_bic(x, &z, |vars| self.data.n_log_n(vars)))
    }

    /// Decomposable score of a whole DAG over the dataset's variables.
    pub fn dag_score(&self, g: &Dag) -> Result<f64> {
        (0..g.n_nodes())
            .map(|v| {
                let ps: Vec<usize> = g.parents(v).iter().copied().collect();
                self.bic(v, &ps)
            })
            .sum()
    }

    /// `f_BIC(U, V | Z) = 2 (S(U | V, Z) − S(U | Z) + ½ ln|D| · δ)` with
    /// `δ = (|dom U| − 1)(|dom V| − 1)|dom Z|`.
    pub fn f_bic(&self, u: usize, v: usize, z: &[usize]) -> Result<GTest> {
        if u == v {
            return Err(Error::DuplicateVariable(u));
        }
        let z = self.canonical(&[u, v], z)?;
        let dof = self.dof(u, v, &z);
        let with_v = Self::with(&z, v);
        let statistic =
            2.0 * (self.bic(u, &with_v)? - self.bic(u, &z)? + 0.5 * self.ln_n * dof as f64);
        Ok(GTest { statistic, dof })
    }

    /// `(|dom U| − 1)(|dom V| − 1) Π_{X ∈ Z} |dom X|`, saturating.
    pub fn dof(&self, u: usize, v: usize, z: &[usize]) -> u64 {
        let base = (self.data.cardinality(u) as u64 - 1) * (self.data.cardinality(v) as u64 - 1);
        z.iter()
            .fold(base, |acc, &x| acc.saturating_mul(self.data.cardinality(x) as u64))
    }

    /// Memoized χ² critical value.
    pub fn critical(&self, dof: u64, alpha: f64) -> Result<f64> {
        let key = (dof, alpha.to_bits());
        if let Some(&c) = self.criticals.read().unwrap().get(&key) {
            return Ok(c);
        }
        let c = chi2_critical(dof, alpha)?;
        self.criticals.write().unwrap().insert(key, c);
        Ok(c)
    }

    /// Tests `U ⟂ V | Z` at risk level `alpha`: independent iff
    /// `f_BIC(U, V | Z) < χ²_δ(α)`.
    pub fn is_independent(&self, u: usize, v: usize, z: &[usize], alpha: f64) -> Result<IndepVerdict> {
        if u == v {
            return Err(Error::DuplicateVariable(u));
        }
        let z = self.canonical(&[u, v], z)?;
        let key = (u, v, z, alpha.to_bits());
        if let Some(&verdict) = self.verdicts.read().unwrap().get(&key) {
            return Ok(verdict);
        }
        let g = self.f_bic(u, v, &key.2)?;
        let critical = self.critical(g.dof, alpha)?;
        let verdict = IndepVerdict {
            statistic: g.statistic,
            dof: g.dof,
            critical,
            independent: g.statistic < critical,
        };
        self.verdicts.write().unwrap().insert(key, verdict);
        Ok(verdict)
    }

    /// Convenience wrapper taking the conditioning set as a `BTreeSet`.
    pub fn test(&self, u: usize, v: usize, z: &BTreeSet<usize>, alpha: f64) -> Result<IndepVerdict> {
        let z: Vec<usize> = z.iter().copied().collect();
        self.is_independent(u, v, &z, alpha)
    }

    /// Number of distinct subsets counted so far.
    pub fn counted_subsets(&self) -> usize {
        self.n_log_n.read().unwrap().len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::VariableMeta;

    fn dataset(cards: &[usize], cols: Vec<Vec<u16>>) -> Dataset {
        let vars = cards
            .iter()
            .enumerate()
            .map(|(i, &c)| VariableMeta::with_cardinality(format!("v{i}"), c))
            .collect();
        Dataset::new(vars, cols).unwrap()
    }

    #[test]
    fn bic_of_marginal_binary() {
        // counts [3, 1], |D| = 4
        let d = dataset(&[2], vec![vec![0, 0, 0, 1]]);
        let ctx = ScoreContext::new(&d).unwrap();
        let expected = -2.942_487_759_035_178_6; // 3 ln(3/4) + ln(1/4) − ½ ln 4
        assert!((ctx.bic(0, &[]).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn deterministic_column_keeps_only_penalty() {
        let d = dataset(&[2], vec![vec![0; 10]]);
        let ctx = ScoreContext::new(&d).unwrap();
        let s = ctx.bic(0, &[]).unwrap();
        assert!((s + 0.5 * 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn penalty_scales_with_parent_domain() {
        let d = dataset(&[2, 3], vec![vec![0, 1, 0, 1, 1, 0], vec![0, 1, 2, 0, 1, 2]]);
        let ctx = ScoreContext::new(&d).unwrap();
        assert_eq!(ctx.dim(0, &[]), 1.0);
        assert_eq!(ctx.dim(0, &[1]), 3.0);
        assert_eq!(ctx.dim(1, &[0]), 4.0);
    }

    #[test]
    fn uniform_table_gives_zero_statistic() {
        // 2x2 counts [[1,1],[1,1]]
        let d = dataset(&[2, 2], vec![vec![0, 0, 1, 1], vec![0, 1, 0, 1]]);
        let ctx = ScoreContext::new(&d).unwrap();
        let g = ctx.f_bic(0, 1, &[]).unwrap();
        assert!(g.statistic.abs() < 1e-12);
        assert_eq!(g.dof, 1);
        let verdict = ctx.is_independent(0, 1, &[], 0.05).unwrap();
        assert!(verdict.independent);
        assert!((verdict.critical - 3.841).abs() < 1e-3);
    }

    #[test]
    fn copy_column_is_dependent() {
        let col: Vec<u16> = (0..1000).map(|i| (i % 2) as u16).collect();
        let d = dataset(&[2, 2], vec![col.clone(), col]);
        let ctx = ScoreContext::new(&d).unwrap();
        let v = ctx.is_independent(0, 1, &[], 0.05).unwrap();
        // G2 = 2 · 1000 · ln 2
        assert!((v.statistic - 2000.0 * 2f64.ln()).abs() < 1e-9);
        assert!(!v.independent);
    }

    #[test]
    fn argument_errors() {
        let d = dataset(&[2, 2], vec![vec![0, 1], vec![1, 0]]);
        let ctx = ScoreContext::new(&d).unwrap();
        assert!(ctx.bic(0, &[0]).is_err());
        assert!(ctx.bic(2, &[]).is_err());
        assert!(ctx.f_bic(0, 0, &[]).is_err());
        assert!(ctx.f_bic(0, 1, &[1]).is_err());
        assert!(ctx.is_independent(0, 1, &[], 1.5).is_err());
    }

    #[test]
    fn empty_dataset_rejected() {
        let d = dataset(&[2], vec![vec![]]);
        assert!(matches!(ScoreContext::new(&d), Err(Error::EmptyDataset)));
    }
}
