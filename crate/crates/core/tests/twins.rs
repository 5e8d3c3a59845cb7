use lpgraph::fold::{check_twin_properties, class_constant, fold_preserves, is_stable_partition, SoluMatch};
use lpgraph::forge::{gen_random_lp, lift_replicate, seeded_rng, GenConfig, LiftPattern};
use lpgraph::graph::encode;
use lpgraph::lp::{min_norm_optimal, solve, LowerBound, LpInstance, LpOutcome, UpperBound};
use lpgraph::wl::run_wl;
use rand::Rng;

/// A small random base LP; some bounds are opened up to infinity.
fn small_base(seed: u64) -> LpInstance {
    let mut rng = seeded_rng(seed, 1);
    let m = rng.random_range(1..=5);
    let n = rng.random_range(1..=5);
    let cfg = GenConfig {
        m,
        n,
        nnz: rng.random_range(1..=m * n),
        c_scale: 1.0,
        bound_sigma: 2.0,
        p_le: 0.5,
        p_eq: 0.25,
        p_ge: 0.25,
        seed,
    };
    let lp = gen_random_lp(&cfg).unwrap();
    let l: Vec<_> = lp.l().iter().map(|&b| if rng.random_bool(0.2) { LowerBound::NegInf } else { b }).collect();
    let u: Vec<_> = lp.u().iter().map(|&b| if rng.random_bool(0.2) { UpperBound::PosInf } else { b }).collect();
    let entries = lp.entries().iter().map(|e| (e.row, e.col, e.value));
    LpInstance::new(m, n, entries, lp.b().to_vec(), lp.circ().to_vec(), lp.c().to_vec(), l, u).unwrap()
}

#[test]
fn lifted_pairs_share_characteristics() {
    let mut optimal = 0;
    for seed in 0..120u64 {
        let base = small_base(seed);
        let pattern = if seed % 2 == 0 { LiftPattern::Cycle } else { LiftPattern::Disjoint };
        let r = 2 + (seed % 2) as usize;
        let (a, b) = lift_replicate(&base, r, pattern, seed).unwrap();
        let report = check_twin_properties(&a, &b, 1e-6).unwrap();
        assert!(report.all_match(), "seed {seed}: {report:?}");
        optimal += (report.solu_match_up_to_perm == SoluMatch::Match) as usize;
    }
    assert!(optimal > 20, "only {optimal} optimal pairs");
}

#[test]
fn fold_lemma_on_lifts() {
    for seed in 0..200u64 {
        let base = small_base(seed);
        let (lifted, _) = lift_replicate(&base, 2, LiftPattern::Cycle, seed).unwrap();
        if let LpOutcome::Optimal { solution, value } = solve(&lifted).unwrap() {
            assert!(fold_preserves(&lifted, &solution, value).unwrap(), "seed {seed}");
        }
    }
}

#[test]
fn stable_fixpoints_and_constant_min_norm_classes() {
    for seed in 0..150u64 {
        let base = small_base(seed);
        let (_, lp) = lift_replicate(&base, 2, LiftPattern::Disjoint, seed).unwrap();
        let stable = run_wl(&encode(&lp)).stable;
        assert!(is_stable_partition(&encode(&lp), &stable).unwrap());
        if solve(&lp).unwrap().is_optimal() {
            let x = min_norm_optimal(&lp).unwrap().x;
            assert!(class_constant(&x, &stable.j_classes, 1e-6), "seed {seed}: {x:?}");
        }
    }
}
