//! End-to-end behaviour on the confounded-pair model `C -> A <- L -> B <- D`.

mod common;

use std::collections::BTreeSet;

use confound::bench::fixtures::{confounded_pair_network, PAIR_A, PAIR_B, PAIR_C, PAIR_D, PAIR_L};
use confound::bench::mutual_information;
use confound::{
    d_separated, find_separator, learn, run_algorithm1, Dataset, LearnerConfig, ScoreContext,
    SeparatorQuery, Verdict,
};

use common::set;

fn observed_sample(rows: usize, seed: u64) -> Dataset {
    confounded_pair_network()
        .sample(rows, seed)
        .unwrap()
        .project(&set(&[PAIR_A, PAIR_B, PAIR_C, PAIR_D]))
        .unwrap()
}

#[test]
fn generating_graph_separations() {
    let bn = confounded_pair_network();
    let g = bn.dag();
    assert_eq!(g.descendants(PAIR_L), set(&[PAIR_A, PAIR_B]));
    let (a, b, c, d) = (set(&[PAIR_A]), set(&[PAIR_B]), set(&[PAIR_C]), set(&[PAIR_D]));
    assert!(!d_separated(g, &a, &b, &BTreeSet::new()).unwrap());
    for z in [BTreeSet::new(), a.clone(), b.clone()] {
        assert!(d_separated(g, &c, &d, &z).unwrap());
    }
    assert!(!d_separated(g, &c, &d, &set(&[PAIR_A, PAIR_B])).unwrap());
}

#[test]
fn children_of_the_latent_are_dependent() {
    let d = observed_sample(20_000, 3);
    let ctx = ScoreContext::new(&d).unwrap();
    let v = ctx.is_independent(0, 1, &[], 0.05).unwrap();
    assert!(!v.independent, "G2 = {}", v.statistic);
    let mi = mutual_information(&confounded_pair_network(), PAIR_A, PAIR_B, &[]).unwrap();
    assert!(mi > 0.05);
}

#[test]
fn separator_searches_on_observed_data() {
    let d = observed_sample(50_000, 5);
    let ctx = ScoreContext::new(&d).unwrap();
    // ids after projection: A=0, B=1, C=2, D=3
    let r = find_separator(&SeparatorQuery::new(1, 2, 7, 0.05).forbidden([0]), &ctx).unwrap();
    assert!(r.found);
    for h in 0..=3 {
        let r = find_separator(&SeparatorQuery::new(0, 1, h, 0.05), &ctx).unwrap();
        assert!(!r.found, "h = {h}");
    }
}

/// With `A -> B` learnt, every observed parent `C` of `A` ends up in a clique
/// with `A` and `B` (and symmetrically for `B -> A`).
#[test]
fn latent_children_become_adjacent_and_shielded() {
    let cfg = LearnerConfig::default();
    let mut good = 0;
    for seed in 0..10 {
        let d = observed_sample(100_000, 40 + seed);
        let g = learn(&d, &cfg).unwrap();
        let (a, b, c, dd) = (0, 1, 2, 3);
        let clique = |x: usize, y: usize, z: usize| g.adjacent(x, y) && g.adjacent(y, z) && g.adjacent(x, z);
        let ok = if g.has_arc(a, b) {
            clique(a, b, c)
        } else if g.has_arc(b, a) {
            clique(b, a, dd)
        } else {
            false
        };
        good += usize::from(ok);
    }
    assert!(good >= 8, "{good}/10");
}

#[test]
fn discovery_recovers_the_pair_and_its_witness_checks_out() {
    let d = observed_sample(50_000, 11);
    let found = run_algorithm1(&d, &LearnerConfig::default(), 7, 0.05).unwrap();
    let r = &found.result;
    assert_eq!(r.latents.len(), 1);
    let l = &r.latents[0];
    let children: BTreeSet<&str> = [r.names[l.children.0].as_str(), r.names[l.children.1].as_str()].into();
    assert_eq!(children, ["A", "B"].into());

    // latents have no parents and two observed children
    assert!(r.dag.parents(l.node).is_empty());
    assert_eq!(r.dag.children(l.node), &set(&[l.children.0, l.children.1]));
    assert!(l.children.0 < r.n_observed() && l.children.1 < r.n_observed());

    let ctx = ScoreContext::new(&d).unwrap();
    let accepted: Vec<_> = found
        .classifications
        .iter()
        .zip(&found.filters)
        .filter(|(c, f)| c.verdict != Verdict::NotLatent && f.kept())
        .collect();
    assert_eq!(accepted.len(), 1);
    for (c, _) in accepted {
        let roles = c.roles.unwrap();
        let z = c.witness.as_ref().unwrap();
        assert!(!z.contains(&roles.a));
        assert!(ctx.test(roles.b, roles.c, z, 0.05).unwrap().independent);
        let mut with_a = z.clone();
        with_a.insert(roles.a);
        assert!(!ctx.test(roles.b, roles.c, &with_a, 0.05).unwrap().independent);
        for p in c.checks.iter().filter(|p| !p.qualifies()) {
            assert!(!p.search.found);
        }
    }
}

#[test]
fn discovery_is_deterministic() {
    let d = observed_sample(20_000, 2);
    let cfg = LearnerConfig::default();
    let a = run_algorithm1(&d, &cfg, 7, 0.05).unwrap();
    let b = run_algorithm1(&d, &cfg, 7, 0.05).unwrap();
    assert_eq!(
        serde_json::to_string(&a.to_json()).unwrap(),
        serde_json::to_string(&b.to_json()).unwrap()
    );
    assert_eq!(a.report(), b.report());
}
