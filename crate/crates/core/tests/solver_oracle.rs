use lpgraph::lp::{enumerate_outcome_oracle, solve, Comparison, LowerBound, LpInstance, LpOutcome, UpperBound};
use proptest::prelude::*;

fn arb_lp() -> impl Strategy<Value = LpInstance> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(m, n)| {
        let coef = prop_oneof![3 => Just(0.0), 5 => (-4i32..=4).prop_map(f64::from), 2 => -3.0..3.0f64];
        let lower = prop_oneof![1 => Just(LowerBound::NegInf), 3 => (-3i32..=1).prop_map(|v| LowerBound::Finite(v.into()))];
        let upper = prop_oneof![1 => Just(UpperBound::PosInf), 3 => (1i32..=4).prop_map(|v| UpperBound::Finite(v.into()))];
        let circ = prop_oneof![Just(Comparison::Le), Just(Comparison::Eq), Just(Comparison::Ge)];
        (
            prop::collection::vec(coef, m * n),
            prop::collection::vec(-3.0..3.0f64, m),
            prop::collection::vec(circ, m),
            prop::collection::vec((-2i32..=2).prop_map(f64::from), n),
            prop::collection::vec(lower, n),
            prop::collection::vec(upper, n),
        )
            .prop_map(move |(a, b, circ, c, l, u)| {
                let entries = a.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(k, &v)| (k / n, k % n, v));
                LpInstance::new(m, n, entries.collect::<Vec<_>>(), b, circ, c, l, u).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn simplex_agrees_with_enumeration(lp in arb_lp()) {
        let ours = solve(&lp).unwrap();
        let oracle = enumerate_outcome_oracle(&lp).unwrap();
        prop_assert_eq!(ours.tag(), oracle.tag());
        if let (LpOutcome::Optimal { value: a, .. }, LpOutcome::Optimal { value: b, .. }) = (&ours, &oracle) {
            prop_assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()), "{} vs {}", a, b);
        }
    }
}
