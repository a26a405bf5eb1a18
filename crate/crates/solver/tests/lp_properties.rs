use hybrid_bell_solver::{lp_solve, LpOutcome, LpProblem, Rational, Scalar};
use num_traits::ToPrimitive;
use proptest::prelude::*;

/// Random bounded 2-variable problem: `0 ≤ x ≤ 10` plus `rows` inequalities `r·x ≤ s`.
fn small_lp() -> impl Strategy<Value = (Vec<i64>, Vec<(i64, i64, i64)>)> {
    (prop::collection::vec(-5i64..=5, 2), prop::collection::vec((-4i64..=4, -4i64..=4, 0i64..=20), 1..5))
}

fn build<T: Scalar>(c: &[i64], rows: &[(i64, i64, i64)]) -> LpProblem<T> {
    let r = |v: i64| T::from_ratio(v, 1);
    let mut p = LpProblem::new(2).minimize(c.iter().map(|&v| r(v)).collect());
    for j in 0..2 {
        p.set_bounds(j, Some(T::zero()), Some(r(10)));
    }
    for &(a, b, s) in rows {
        p.add_le(vec![r(a), r(b)], r(s));
    }
    p
}

/// Minimum over all vertices of the feasible polygon, enumerated by intersecting every pair
/// of constraint lines with exact rationals.
fn vertex_enumeration(c: &[i64], rows: &[(i64, i64, i64)]) -> Rational {
    let mut lines: Vec<(i64, i64, i64)> = rows.to_vec();
    lines.extend([(1, 0, 10), (0, 1, 10), (-1, 0, 0), (0, -1, 0)]);
    let q = |v: i64| Rational::from_integer(v.into());
    let mut best: Option<Rational> = None;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a1, b1, s1) = lines[i];
            let (a2, b2, s2) = lines[j];
            let det = a1 * b2 - a2 * b1;
            if det == 0 {
                continue;
            }
            let x = Rational::new((s1 * b2 - s2 * b1).into(), det.into());
            let y = Rational::new((a1 * s2 - a2 * s1).into(), det.into());
            let feasible = lines.iter().all(|&(a, b, s)| q(a) * &x + q(b) * &y <= q(s));
            if feasible {
                let v = q(c[0]) * &x + q(c[1]) * &y;
                if best.as_ref().map_or(true, |b| v < *b) {
                    best = Some(v);
                }
            }
        }
    }
    best.expect("origin is always feasible")
}

proptest! {
    #[test]
    fn exact_optimum_matches_vertex_enumeration((c, rows) in small_lp()) {
        let p = build::<Rational>(&c, &rows);
        let sol = lp_solve(&p).unwrap().optimal().expect("bounded and feasible");
        prop_assert_eq!(&sol.objective, &vertex_enumeration(&c, &rows));
        prop_assert_eq!(&sol.objective, &sol.dual_objective);
        prop_assert!(Scalar::near_zero(&p.max_violation(&sol.x)));
        prop_assert!(Scalar::near_zero(&sol.complementarity));
    }

    #[test]
    fn float_path_agrees_with_exact((c, rows) in small_lp()) {
        let exact = vertex_enumeration(&c, &rows).to_f64().unwrap();
        let p = build::<f64>(&c, &rows);
        let sol = lp_solve(&p).unwrap().optimal().expect("bounded and feasible");
        prop_assert!((sol.objective - exact).abs() < 1e-9);
        prop_assert!((sol.objective - sol.dual_objective).abs() < 1e-9);
        prop_assert!(p.max_violation(&sol.x) < 1e-9);
    }

    #[test]
    fn strong_duality_with_equalities(
        c in prop::collection::vec(0i64..=6, 4),
        a in prop::collection::vec(prop::collection::vec(0i64..=3, 4), 1..3),
        x0 in prop::collection::vec(0i64..=4, 4),
    ) {
        // Right-hand sides come from a known nonnegative point, so the problem is feasible;
        // c ≥ 0 on x ≥ 0 keeps it bounded.
        let q = |v: i64| Rational::from_integer(v.into());
        let mut p = LpProblem::new(4).minimize(c.iter().map(|&v| q(v)).collect());
        for row in &a {
            let rhs: i64 = row.iter().zip(&x0).map(|(r, x)| r * x).sum();
            p.add_eq(row.iter().map(|&v| q(v)).collect(), q(rhs));
        }
        let sol = lp_solve(&p).unwrap().optimal().expect("feasible and bounded");
        prop_assert_eq!(&sol.objective, &sol.dual_objective);
        prop_assert!(sol.objective <= p.objective_value(&x0.iter().map(|&v| q(v)).collect::<Vec<_>>()));
        prop_assert!(sol.reduced_costs.iter().all(|r| !r.is_neg()));
    }

    #[test]
    fn infeasible_systems_have_certificates(k in 1i64..50, n in 2usize..6) {
        // x₀ ≥ k together with Σx ≤ k − 1 on x ≥ 0.
        let q = |v: i64| Rational::from_integer(v.into());
        let mut p: LpProblem<Rational> = LpProblem::new(n);
        let mut e0 = vec![q(0); n];
        e0[0] = q(1);
        p.add_ge(e0, q(k));
        p.add_le(vec![q(1); n], q(k - 1));
        match lp_solve(&p).unwrap() {
            LpOutcome::Infeasible(cert) => prop_assert!(cert.margin(&p).unwrap().is_pos()),
            other => prop_assert!(false, "expected infeasible, got {:?}", other),
        }
    }
}

#[test]
fn textbook_example() {
    // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 has optimum 36 at (2, 6).
    let q = |v: i64| Rational::from_integer(v.into());
    let mut p = LpProblem::new(2).minimize(vec![q(-3), q(-5)]);
    p.add_le(vec![q(1), q(0)], q(4));
    p.add_le(vec![q(0), q(2)], q(12));
    p.add_le(vec![q(3), q(2)], q(18));
    let sol = lp_solve(&p).unwrap().optimal().unwrap();
    assert_eq!(sol.objective, q(-36));
    assert_eq!(sol.x, vec![q(2), q(6)]);
    // Shadow prices of the textbook dual: (0, 3/2, 1).
    let expect = [q(0), Rational::new((-3).into(), 2.into()), q(-1)];
    let mags: Vec<Rational> = sol.ub_duals.iter().map(|v| if v.is_neg() { -v.clone() } else { v.clone() }).collect();
    let expect_mags: Vec<Rational> = expect.iter().map(|v| if v.is_neg() { -v.clone() } else { v.clone() }).collect();
    assert_eq!(mags, expect_mags);
}

#[test]
fn unbounded_ray_decreases_objective() {
    let mut p: LpProblem<f64> = LpProblem::new(2).minimize(vec![-1.0, 0.0]);
    p.add_le(vec![-1.0, 1.0], 1.0);
    match lp_solve(&p).unwrap() {
        LpOutcome::Unbounded { point, ray } => {
            assert!(p.max_violation(&point) < 1e-12);
            assert!(p.objective_value(&ray) < 0.0);
            assert!(ray.iter().all(|r| *r >= 0.0));
        }
        other => panic!("expected unbounded, got {other:?}"),
    }
}
