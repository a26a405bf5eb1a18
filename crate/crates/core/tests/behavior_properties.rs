use hybrid_bell::sampling::{random_behavior, random_classical_behavior, rng};
use hybrid_bell::{Behavior, DeterministicStrategy, ExactBehavior, Rational, Scenario};
use proptest::prelude::*;

proptest! {
    #[test]
    fn vector_roundtrip(seed in any::<u64>(), l in 2usize..6) {
        let b = random_behavior(l, &mut rng(seed)).unwrap();
        let v = b.to_vector();
        prop_assert_eq!(v.len(), 4 * l + 4);
        prop_assert_eq!(Behavior::from_vector(l, &v).unwrap(), b);
    }

    #[test]
    fn correlator_roundtrip(seed in any::<u64>(), l in 2usize..6) {
        let b = random_behavior(l, &mut rng(seed)).unwrap();
        let back = b.to_correlators().to_behavior().unwrap();
        prop_assert!(back.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn mixtures_stay_valid(seed in any::<u64>(), l in 2usize..5, w in 0.0..1.0f64) {
        let mut r = rng(seed);
        let p = random_behavior(l, &mut r).unwrap();
        let q = random_classical_behavior(l, 3, &mut r).unwrap();
        let m = Behavior::mixture(&[(w, &p), (1.0 - w, &q)]).unwrap();
        prop_assert!(m.is_valid());
        for (i, v) in m.to_vector().iter().enumerate() {
            let expect = w * p.to_vector()[i] + (1.0 - w) * q.to_vector()[i];
            prop_assert!((v - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn ace_is_total_variation_of_interventions(seed in any::<u64>()) {
        // For binary B, max_b |p(b|do 0) − p(b|do 1)| equals half the L1 distance.
        let b = random_behavior(2, &mut rng(seed)).unwrap();
        let l1: f64 = (0..2).map(|k| (b.do_(0, k) - b.do_(1, k)).abs()).sum();
        prop_assert!((b.ace() - 0.5 * l1).abs() < 1e-15);
    }
}

#[test]
fn strategies_are_distinct_valid_vertices() {
    for l in 2..=4 {
        let all = DeterministicStrategy::all(Scenario::new(l).unwrap());
        assert_eq!(all.len(), (1 << l) * 4);
        let behaviors: Vec<ExactBehavior> = all.iter().map(|s| s.behavior::<Rational>()).collect();
        for (i, b) in behaviors.iter().enumerate() {
            assert!(b.is_valid());
            assert!(behaviors[i + 1..].iter().all(|c| c != b));
            // Exactly one nonzero entry per table.
            let ones = b.to_vector().iter().filter(|v| **v == Rational::from_integer(1.into())).count();
            assert_eq!(ones, l + 2);
        }
    }
}

#[test]
fn exact_and_float_paths_agree() {
    let b = random_behavior(3, &mut rng(1)).unwrap();
    let exact = ExactBehavior::from_f64(&b);
    assert!(exact.to_f64().max_abs_diff(&b) < 1e-15);
}

#[test]
fn scenario_bounds() {
    assert!(Scenario::new(1).is_err());
    assert!(Behavior::from_vector(2, &[0.25; 11]).is_err());
}
