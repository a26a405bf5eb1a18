use hybrid_bell::polytope::{il22_min, membership_lp, trivial_min, LinearFunctional};
use hybrid_bell::quantum::{
    born_behavior, max_violation_model, noisy_behavior, noisy_functional, qace, random_unit_vector, seesaw_optimize,
    Binning, EfficiencyPoint, QuantumInstrumentalModel, SeesawOptions,
};
use hybrid_bell::sampling::{random_behavior, random_classical_behavior, random_quantum_behavior, rng};
use hybrid_bell::solver::linalg::{c, CVector};
use hybrid_bell::Behavior;
use proptest::prelude::*;

const QUANTUM_BOUND: f64 = -(std::f64::consts::SQRT_2 - 1.0) / 2.0;

/// `|⟨u ⊗ v|ψ⟩|²` written out on the four amplitudes.
fn overlap_sq(psi: &CVector, u: &CVector, v: &CVector) -> f64 {
    let mut z = c(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            z += (u[i] * v[j]).conj() * psi[2 * i + j];
        }
    }
    z.norm_sqr()
}

fn orthogonal(v: &CVector) -> CVector {
    CVector::from_vec(vec![-v[1].conj(), v[0].conj()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn born_rule_matches_amplitudes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let psi = random_unit_vector(4, &mut r);
        let alice: Vec<CVector> = (0..3).map(|_| random_unit_vector(2, &mut r)).collect();
        let bob = [random_unit_vector(2, &mut r), random_unit_vector(2, &mut r)];
        let m = QuantumInstrumentalModel::from_projectors(&psi, &alice, [&bob[0], &bob[1]]).unwrap();
        let b = born_behavior(&m).unwrap();
        let basis = |v: &CVector, k: usize| if k == 0 { v.clone() } else { orthogonal(v) };
        for (x, ax) in alice.iter().enumerate() {
            for a in 0..2 {
                for bb in 0..2 {
                    let expect = overlap_sq(&psi, &basis(ax, a), &basis(&bob[a], bb));
                    prop_assert!((b.obs(x, a, bb) - expect).abs() < 1e-12);
                }
            }
        }
        // p(b|do a) sums Alice out in any basis.
        let z = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        for a in 0..2 {
            for bb in 0..2 {
                let expect: f64 = (0..2).map(|k| overlap_sq(&psi, &basis(&z, k), &basis(&bob[a], bb))).sum();
                prop_assert!((b.do_(a, bb) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quantum_behaviors_respect_known_bounds(seed in any::<u64>(), l in 2usize..5) {
        let b = random_quantum_behavior(l, &mut rng(seed)).unwrap();
        prop_assert!(b.is_valid());
        prop_assert!(trivial_min(&b) >= -1e-12);
        prop_assert!(il22_min(&b).0 >= QUANTUM_BOUND - 1e-9);
    }

    #[test]
    fn loss_map_is_affine(seed in any::<u64>(), w in 0.0..1.0f64, e1 in 0.0..1.0f64, e2 in 0.0..1.0f64) {
        let mut r = rng(seed);
        let p = random_behavior(2, &mut r).unwrap();
        let q = random_behavior(2, &mut r).unwrap();
        let e = EfficiencyPoint::new(e1, e2).unwrap();
        let bin = Binning::default();
        let mixed = noisy_behavior(&Behavior::mixture(&[(w, &p), (1.0 - w, &q)]).unwrap(), e, bin).unwrap();
        let np = noisy_behavior(&p, e, bin).unwrap();
        let nq = noisy_behavior(&q, e, bin).unwrap();
        prop_assert!(mixed.is_valid());
        prop_assert!(mixed.max_abs_diff(&Behavior::mixture(&[(w, &np), (1.0 - w, &nq)]).unwrap()) < 1e-14);
    }

    #[test]
    fn pulled_back_functional(seed in any::<u64>(), e1 in 0.0..1.0f64, e2 in 0.0..1.0f64, a in 0usize..2, b in 0usize..2) {
        let mut r = rng(seed);
        let p = random_behavior(2, &mut r).unwrap();
        let e = EfficiencyPoint::new(e1, e2).unwrap();
        let bin = Binning { a_star: a, b_star: b };
        let f = LinearFunctional::il22(2, 0, 1, 1, 0).unwrap();
        let direct = f.eval(&noisy_behavior(&p, e, bin).unwrap());
        prop_assert!((noisy_functional(&f, e, bin).eval(&p) - direct).abs() < 1e-13);
    }

    #[test]
    fn losses_keep_classical_behaviors_classical(seed in any::<u64>(), e1 in 0.0..1.0f64, e2 in 0.0..1.0f64) {
        let p = random_classical_behavior(3, 4, &mut rng(seed)).unwrap();
        let n = noisy_behavior(&p, EfficiencyPoint::new(e1, e2).unwrap(), Binning::default()).unwrap();
        prop_assert!(membership_lp(&n).unwrap().is_member());
    }
}

#[test]
fn max_violation_model_reaches_the_bound() {
    let b = born_behavior(&max_violation_model()).unwrap();
    assert!((il22_min(&b).0 - QUANTUM_BOUND).abs() < 1e-12);
}

#[test]
fn seesaw_is_monotone_deterministic_and_sound() {
    let f = LinearFunctional::il22(3, 1, 0, 2, 0).unwrap();
    let opts = SeesawOptions { restarts: 4, ..SeesawOptions::with_seed(11) };
    let r1 = seesaw_optimize(&f, &opts).unwrap();
    let r2 = seesaw_optimize(&f, &opts).unwrap();
    assert_eq!(r1.value, r2.value);
    assert!(r1.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!((f.eval(&born_behavior(&r1.model).unwrap()) - r1.value).abs() < 1e-12);
    assert!(r1.value >= QUANTUM_BOUND - 1e-9);
    assert_eq!(r1.restart_values.len(), 4);
    assert!(r1.restart_values.iter().all(|v| *v >= r1.value));
}

#[test]
fn qace_of_max_violation_model() {
    // Bob measures two mutually unbiased bases on a maximally mixed qubit.
    assert!(qace(&max_violation_model()).abs() < 1e-12);
}
