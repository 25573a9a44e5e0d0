//! Checks against independent implementations and closed forms.

mod common;

use confound::{chi2_critical, Dag, Dataset, ScoreContext, VariableMeta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use common::{direct_g2, random_bn, random_dag, set};

#[test]
fn chi2_critical_matches_statrs() {
    for dof in [1u64, 2, 3, 5, 8, 13, 30, 60, 120, 500, 2000] {
        for alpha in [0.5, 0.1, 0.05, 0.01, 0.001] {
            let ours = chi2_critical(dof, alpha).unwrap();
            let tail = ChiSquared::new(dof as f64).unwrap().sf(ours);
            assert!((tail - alpha).abs() < 1e-9, "dof {dof} alpha {alpha}: tail {tail}");
        }
    }
}

#[test]
fn chi2_critical_decreases_in_alpha() {
    let mut last = f64::INFINITY;
    for i in 1..100 {
        let c = chi2_critical(3, i as f64 / 100.0).unwrap();
        assert!(c < last);
        last = c;
    }
    assert!(chi2_critical(3, 0.999_999).unwrap() < 1e-3);
}

#[test]
fn f_bic_symmetric_and_equal_to_g2() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..40 {
        let cards: Vec<usize> = (0..5).map(|_| rng.gen_range(2..=4)).collect();
        let g = random_dag(&mut rng, 5, 0.5);
        let d = random_bn(&mut rng, g, &cards, 0.7).sample(3000, i).unwrap();
        let ctx = ScoreContext::new(&d).unwrap();
        let z = [2, 4];
        let uv = ctx.f_bic(0, 3, &z).unwrap();
        let vu = ctx.f_bic(3, 0, &z).unwrap();
        assert!((uv.statistic - vu.statistic).abs() < 1e-9);
        assert_eq!(uv.dof, vu.dof);
        assert_eq!(uv.dof as usize, (cards[0] - 1) * (cards[3] - 1) * cards[2] * cards[4]);
        assert!((uv.statistic - direct_g2(&d, 0, 3, &z)).abs() < 1e-9);
    }
}

#[test]
fn copy_column_gives_two_n_ln2() {
    let x: Vec<u16> = (0..1000).map(|i| (i % 2) as u16).collect();
    let vars = vec![VariableMeta::with_cardinality("X", 2), VariableMeta::with_cardinality("Y", 2)];
    let d = Dataset::new(vars, vec![x.clone(), x]).unwrap();
    let ctx = ScoreContext::new(&d).unwrap();
    let v = ctx.is_independent(0, 1, &[], 0.05).unwrap();
    assert!((v.statistic - 2000.0 * 2f64.ln()).abs() < 1e-9);
    assert!(!v.independent);
}

#[test]
fn independent_binaries_are_judged_independent() {
    let mut indep = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<Vec<u16>> = (0..2)
            .map(|_| (0..100_000).map(|_| rng.gen_range(0..2)).collect())
            .collect();
        let vars = vec![VariableMeta::with_cardinality("U", 2), VariableMeta::with_cardinality("V", 2)];
        let d = Dataset::new(vars, cols).unwrap();
        let ctx = ScoreContext::new(&d).unwrap();
        indep += usize::from(ctx.is_independent(0, 1, &[], 0.05).unwrap().independent);
    }
    assert!(indep >= 90, "{indep}/100");
}

#[test]
fn dag_score_decomposes_and_cache_is_transparent() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cards = [2, 3, 2, 4];
    let g = random_dag(&mut rng, 4, 0.6);
    let d = random_bn(&mut rng, g.clone(), &cards, 1.0).sample(5000, 1).unwrap();
    let ctx = ScoreContext::new(&d).unwrap();
    let by_node: f64 = (0..4)
        .map(|v| {
            let pa: Vec<usize> = g.parents(v).iter().copied().collect();
            let cached = ctx.bic(v, &pa).unwrap();
            assert_eq!(cached.to_bits(), ctx.bic_uncached(v, &pa).unwrap().to_bits());
            cached
        })
        .sum();
    assert!((ctx.dag_score(&g).unwrap() - by_node).abs() < 1e-9);
}

#[test]
fn independent_parent_does_not_help_at_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = Dag::from_arcs(3, &[(0, 1)]).unwrap();
    let d = random_bn(&mut rng, g, &[2, 2, 3], 1.0).sample(100_000, 8).unwrap();
    let ctx = ScoreContext::new(&d).unwrap();
    assert!(ctx.bic(1, &[0, 2]).unwrap() < ctx.bic(1, &[0]).unwrap());
}

#[test]
fn projection_commutes_with_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let g = random_dag(&mut rng, 5, 0.5);
    let d = random_bn(&mut rng, g, &[2, 3, 2, 3, 2], 1.0).sample(2000, 4).unwrap();
    let keep = set(&[1, 2, 4]);
    let p = d.project(&keep).unwrap();
    let (a, b) = (p.count(0, &[1, 2]).unwrap(), d.count(1, &[2, 4]).unwrap());
    assert_eq!((a.counts, a.marginals), (b.counts, b.marginals));
    assert_eq!(p.project(&set(&[0, 1, 2])).unwrap(), p);
}
