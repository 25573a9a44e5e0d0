//! Repeated inject / sample / discover / score runs over a grid of sizes.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::inject::{inject_confounders, Injection, InjectionConfig};
use super::metrics::{compare_confounders, compare_cpdags, f1_score, ConfounderScore, CpdagScore};
use super::DiscreteBayesNet;
use crate::confounder::{run_algorithm1, Timings};
use crate::error::{Error, Result};
use crate::graphs::{cpdag_with_names, Pdag};
use crate::learner::LearnerConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    /// Its `seed` is replaced by one derived from `seed` and the repetition.
    pub injection: InjectionConfig,
    pub learner: LearnerConfig,
    pub h: usize,
    pub alpha: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            sizes: vec![5_000, 20_000, 50_000, 100_000],
            reps: 10,
            seed: 0,
            injection: InjectionConfig::default(),
            learner: LearnerConfig::default(),
            h: 7,
            alpha: 0.05,
        }
    }
}

/// splitmix64 over a base seed and a list of tags.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    tags.iter().fold(mix(base), |acc, &t| mix(acc ^ mix(t)))
}

/// One discovery run on one sampled dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub size: usize,
    pub rep: usize,
    pub confounders: ConfounderScore,
    pub cpdag: CpdagScore,
    pub timings: Timings,
}

/// Averages over the successful runs of one dataset size.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub size: usize,
    pub runs: usize,
    pub failed: usize,
    pub ok: f64,
    pub not_ok: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    /// Mean seconds spent after learning.
    pub time: f64,
    pub cpdag_ok: f64,
    pub miss: f64,
    pub rev: f64,
    pub type_mismatch: f64,
    pub xs: f64,
}

/// The planted network's CPDAG, latents included.
pub fn truth_cpdag(inj: &Injection) -> Pdag {
    let mut p = cpdag_with_names(inj.bn.dag(), inj.bn.names());
    p.latents = inj
        .latents
        .iter()
        .map(|l| crate::graphs::LatentNode {
            node: l.node,
            children: l.children,
        })
        .collect();
    p
}

/// Samples `size` rows from a planted network, hides the latents, runs
/// discovery and scores it.
pub fn evaluate_once(
    inj: &Injection,
    size: usize,
    sample_seed: u64,
    cfg: &BenchmarkConfig,
) -> Result<(ConfounderScore, CpdagScore, Timings)> {
    let data = inj.bn.sample(size, sample_seed)?.project(&inj.observed())?;
    let found = run_algorithm1(&data, &cfg.learner, cfg.h, cfg.alpha)?;
    let r = &found.result;
    let learned: Vec<(String, String)> = r
        .latents
        .iter()
        .map(|l| (r.names[l.children.0].clone(), r.names[l.children.1].clone()))
        .collect();
    let conf = compare_confounders(&inj.child_pairs(), &learned);
    let cpdag = compare_cpdags(&truth_cpdag(inj), &r.cpdag)?;
    Ok((conf, cpdag, found.timings))
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn summarize(size: usize, outcomes: &[&RunOutcome], failed: usize) -> BenchRow {
    let avg = |f: &dyn Fn(&RunOutcome) -> f64| mean(outcomes.iter().map(|o| f(o))).unwrap_or(f64::NAN);
    let precision = mean(outcomes.iter().filter_map(|o| o.confounders.precision));
    let recall = mean(outcomes.iter().filter_map(|o| o.confounders.recall));
    BenchRow {
        size,
        runs: outcomes.len(),
        failed,
        ok: avg(&|o| o.confounders.ok as f64),
        not_ok: avg(&|o| o.confounders.not_ok as f64),
        precision,
        recall,
        f1: f1_score(precision, recall),
        time: avg(&|o| o.timings.post_learning.as_secs_f64()),
        cpdag_ok: avg(&|o| o.cpdag.ok as f64),
        miss: avg(&|o| o.cpdag.miss as f64),
        rev: avg(&|o| o.cpdag.rev as f64),
        type_mismatch: avg(&|o| o.cpdag.type_mismatch as f64),
        xs: avg(&|o| o.cpdag.xs as f64),
    }
}

#[derive(Debug)]
pub struct FailedRun {
    pub size: usize,
    pub rep: usize,
    pub error: Error,
}

#[derive(Debug)]
pub struct BenchmarkReport {
    /// One row per size, in grid order.
    pub rows: Vec<BenchRow>,
    pub runs: Vec<RunOutcome>,
    pub failures: Vec<FailedRun>,
}

/// Runs the whole grid. Repetition `r` plants its confounders once and reuses
/// that network for every size. Failed runs are counted in their row and
/// kept with their error.
pub fn run_benchmark(bn: &DiscreteBayesNet, cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    if cfg.reps == 0 || cfg.sizes.is_empty() {
        return Err(Error::InvalidArgument("need at least one size and one repetition".into()));
    }
    let per_rep: Vec<Vec<(usize, Result<RunOutcome>)>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let inj_cfg = InjectionConfig {
                seed: derive_seed(cfg.seed, &[rep as u64]),
                ..cfg.injection.clone()
            };
            let injected = inject_confounders(bn, &inj_cfg);
            cfg.sizes
                .iter()
                .map(|&size| {
                    let outcome = match &injected {
                        Err(e) => Err(Error::InvalidModel(e.to_string())),
                        Ok(inj) => {
                            let seed = derive_seed(cfg.seed, &[rep as u64, size as u64]);
                            evaluate_once(inj, size, seed, cfg).map(|(c, p, t)| RunOutcome {
                                size,
                                rep,
                                confounders: c,
                                cpdag: p,
                                timings: t,
                            })
                        }
                    };
                    (size, outcome)
                })
                .collect()
        })
        .collect();

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (rep, row) in per_rep.into_iter().enumerate() {
        for (size, outcome) in row {
            match outcome {
                Ok(o) => runs.push(o),
                Err(error) => failures.push(FailedRun { size, rep, error }),
            }
        }
    }
    let rows = cfg
        .sizes
        .iter()
        .map(|&size| {
            let ok: Vec<&RunOutcome> = runs.iter().filter(|o| o.size == size).collect();
            let failed = failures.iter().filter(|f| f.size == size).count();
            summarize(size, &ok, failed)
        })
        .collect();
    Ok(BenchmarkReport {
        rows,
        runs,
        failures,
    })
}

fn cell(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v:.3}"),
        _ => "NA".into(),
    }
}

/// Tab-separated table, one line per size. The time column is left out when
/// `with_time` is false so that output is reproducible byte for byte.
pub fn format_table(rows: &[BenchRow], with_time: bool) -> String {
    let mut s = String::from("size\truns\tfailed\tok\tnok\tprecision\trecall\tf1");
    if with_time {
        s.push_str("\ttime");
    }
    s.push_str("\tcpdag_ok\tmiss\trev\ttype\txs\n");
    for r in rows {
        let _ = write!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.size,
            r.runs,
            r.failed,
            cell(Some(r.ok)),
            cell(Some(r.not_ok)),
            cell(r.precision),
            cell(r.recall),
            cell(r.f1)
        );
        if with_time {
            let _ = write!(s, "\t{}", cell(Some(r.time)));
        }
        let _ = writeln!(
            s,
            "\t{}\t{}\t{}\t{}\t{}",
            cell(Some(r.cpdag_ok)),
            cell(Some(r.miss)),
            cell(Some(r.rev)),
            cell(Some(r.type_mismatch)),
            cell(Some(r.xs))
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(1, &[0]);
        assert_ne!(a, derive_seed(1, &[1]));
        assert_ne!(a, derive_seed(2, &[0]));
        assert_ne!(derive_seed(1, &[0, 5000]), derive_seed(1, &[0, 50000]));
        assert_eq!(a, derive_seed(1, &[0]));
    }

    #[test]
    fn table_marks_undefined_rates() {
        let row = BenchRow {
            size: 100,
            runs: 1,
            failed: 0,
            ok: 0.0,
            not_ok: 0.0,
            precision: None,
            recall: Some(0.0),
            f1: None,
            time: 0.5,
            cpdag_ok: 3.0,
            miss: 1.0,
            rev: 0.0,
            type_mismatch: 0.0,
            xs: 0.0,
        };
        let t = format_table(std::slice::from_ref(&row), false);
        assert_eq!(
            t.lines().nth(1).unwrap(),
            "100\t1\t0\t0.000\t0.000\tNA\t0.000\tNA\t3.000\t1.000\t0.000\t0.000\t0.000"
        );
        assert!(format_table(&[row], true).lines().next().unwrap().contains("\ttime\t"));
    }
}
