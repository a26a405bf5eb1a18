use hybrid_bell::polytope::{
    il22_min, membership_constructive, membership_lp, satisfies_all, trivial_min, LinearFunctional, LpMembership,
    Relabeling,
};
use hybrid_bell::sampling::{random_behavior, random_classical_behavior, random_quantum_behavior, random_trivial_class_behavior, rng};
use hybrid_bell::quantum::{born_behavior, max_violation_model};
use hybrid_bell::solver::{lp_solve, LpProblem};
use hybrid_bell::{Behavior, DeterministicStrategy, Scenario};
use proptest::prelude::*;

/// Classical membership decided by a plain feasibility LP over explicitly built vertices.
fn oracle_member(b: &Behavior) -> bool {
    let l = b.l();
    let mut vertices = Vec::new();
    for f in 0..1usize << l {
        for g in 0..4usize {
            let mut v = vec![0.0; 4 * l + 4];
            let (g0, g1) = (g & 1, (g >> 1) & 1);
            let gb = |a: usize| if a == 0 { g0 } else { g1 };
            for x in 0..l {
                let a = (f >> x) & 1;
                v[4 * x + 2 * a + gb(a)] = 1.0;
            }
            for a in 0..2 {
                v[4 * l + 2 * a + gb(a)] = 1.0;
            }
            vertices.push(v);
        }
    }
    let target = b.to_vector();
    let n = vertices.len();
    let mut p: LpProblem<f64> = LpProblem::new(n + 2 * target.len());
    // Σ w v + s⁺ − s⁻ = b, Σ w = 1, minimize slack.
    let mut c = vec![0.0; n];
    c.extend(vec![1.0; 2 * target.len()]);
    p = p.minimize(c);
    for (i, t) in target.iter().enumerate() {
        let mut row: Vec<f64> = vertices.iter().map(|v| v[i]).collect();
        row.extend((0..target.len()).map(|k| if k == i { 1.0 } else { 0.0 }));
        row.extend((0..target.len()).map(|k| if k == i { -1.0 } else { 0.0 }));
        p.add_eq(row, *t);
    }
    let mut ones = vec![1.0; n];
    ones.extend(vec![0.0; 2 * target.len()]);
    p.add_eq(ones, 1.0);
    lp_solve(&p).unwrap().optimal().unwrap().objective < 1e-9
}

/// Explicit I_222-type form `p(b|do a) − p(a,b|x') + p(a,b̄|x) + p(ā,c|x) − p(ā,c|x')`,
/// minimized over all index choices.
fn oracle_il22_min(p: &Behavior) -> f64 {
    let mut best = f64::INFINITY;
    for x in 0..p.l() {
        for xp in 0..p.l() {
            if x == xp {
                continue;
            }
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        let v = p.do_(a, b) - p.obs(xp, a, b) + p.obs(x, a, 1 - b) + p.obs(x, 1 - a, c)
                            - p.obs(xp, 1 - a, c);
                        best = best.min(v);
                    }
                }
            }
        }
    }
    best
}

/// Maximal-violation behavior padded to `l` settings and randomly relabeled.
fn relabeled_optimum<R: rand::Rng>(l: usize, r: &mut R) -> Behavior {
    let b = born_behavior(&max_violation_model()).unwrap();
    let mut obs = b.obs_table().to_vec();
    while obs.len() < l {
        obs.push(obs[0]);
    }
    let padded = Behavior::new(obs, *b.do_table()).unwrap();
    let all = Relabeling::all(l);
    all[r.gen_range(0..all.len())].apply(&padded).unwrap()
}

/// Noisy quantum, unconstrained or near-optimal behavior; the visibility spreads samples
/// across the polytope boundary.
fn boundary_sample(seed: u64, l: usize) -> Behavior {
    let mut r = rng(seed);
    let q = match seed % 3 {
        0 => random_behavior(l, &mut r).unwrap(),
        1 => relabeled_optimum(l, &mut r),
        _ => random_quantum_behavior(l, &mut r).unwrap(),
    };
    let u = Behavior::uniform(l).unwrap();
    let v: f64 = rand::Rng::gen_range(&mut r, 0.5..1.0);
    Behavior::mixture(&[(v, &q), (1.0 - v, &u)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn il22_min_matches_explicit_form(seed in any::<u64>(), l in 2usize..4) {
        let b = boundary_sample(seed, l);
        prop_assert!((il22_min(&b).0 - oracle_il22_min(&b)).abs() < 1e-12);
    }

    #[test]
    fn membership_agrees_with_vertex_lp(seed in any::<u64>(), l in 2usize..4) {
        let b = boundary_sample(seed, l);
        let expect = oracle_member(&b);
        prop_assert_eq!(membership_lp(&b).unwrap().is_member(), expect);
        prop_assert_eq!(membership_constructive(&b).unwrap().is_feasible(), expect);
        prop_assert_eq!(satisfies_all(&b, &1e-9), expect);
    }

    #[test]
    fn lp_certificates_are_valid(seed in any::<u64>()) {
        let b = boundary_sample(seed, 2);
        match membership_lp(&b).unwrap() {
            LpMembership::Member { decomposition, .. } => {
                let parts: Vec<(f64, Behavior)> = decomposition.iter().map(|(s, w)| (*w, s.behavior())).collect();
                let refs: Vec<(f64, &Behavior)> = parts.iter().map(|(w, v)| (*w, v)).collect();
                prop_assert!(Behavior::mixture(&refs).unwrap().max_abs_diff(&b) < 1e-9);
            }
            LpMembership::NonMember { certificate, violation } => {
                prop_assert!(violation < 0.0);
                prop_assert!((certificate.eval(&b) - violation).abs() < 1e-9);
                prop_assert!((certificate.eval(&Behavior::uniform(2).unwrap()) - 0.5).abs() < 1e-9);
                for s in DeterministicStrategy::all(Scenario::new(2).unwrap()) {
                    prop_assert!(certificate.eval(&s.behavior()) >= -1e-9);
                }
            }
        }
    }

    #[test]
    fn relabeling_preserves_membership(seed in any::<u64>(), k in 0usize..16) {
        let b = boundary_sample(seed, 2);
        let r = &Relabeling::all(2)[k];
        let rb = r.apply(&b).unwrap();
        prop_assert_eq!(membership_lp(&rb).unwrap().is_member(), membership_lp(&b).unwrap().is_member());
        prop_assert!((il22_min(&rb).0 - il22_min(&b).0).abs() < 1e-12);
        prop_assert!(r.inverse().apply(&rb).unwrap().max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn classical_mixtures_are_members(seed in any::<u64>(), l in 2usize..5, k in 1usize..6) {
        let b = random_classical_behavior(l, k, &mut rng(seed)).unwrap();
        prop_assert!(membership_lp(&b).unwrap().is_member());
        prop_assert!(trivial_min(&b) >= -1e-12);
        prop_assert!(il22_min(&b).0 >= -1e-12);
    }

    #[test]
    fn trivial_class_survives_quantum_mixing(seed in any::<u64>(), l in 2usize..5) {
        let b = random_trivial_class_behavior(l, &mut rng(seed)).unwrap();
        prop_assert!(trivial_min(&b) >= -1e-12);
    }
}

#[test]
fn samples_cover_both_sides() {
    let (mut inside, mut trivial_out, mut il22_out) = (0, 0, 0);
    for seed in 0..300 {
        let b = boundary_sample(seed, 2);
        if trivial_min(&b) < -1e-9 {
            trivial_out += 1;
        } else if il22_min(&b).0 < -1e-9 {
            il22_out += 1;
        } else {
            inside += 1;
        }
    }
    assert!(inside > 20 && trivial_out > 20 && il22_out > 5, "{inside} {trivial_out} {il22_out}");
}

#[test]
fn il22_orbit_size_and_exact_vertex_values() {
    let f: LinearFunctional<hybrid_bell::Rational> = LinearFunctional::il22(2, 0, 0, 0, 1).unwrap();
    assert_eq!(f.orbit().len(), 8);
    for s in DeterministicStrategy::all(Scenario::new(2).unwrap()) {
        assert!(f.eval(&s.behavior()) >= hybrid_bell::Rational::from_integer(0.into()));
    }
}
