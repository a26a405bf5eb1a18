use std::collections::BTreeSet;

use hybrid_bell_solver::{double_description, lp_solve, HullOutcome, LpProblem, Rational, Scalar};
use proptest::prelude::*;

type P3 = [i64; 3];

fn q(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn to_rational(points: &[P3]) -> Vec<Vec<Rational>> {
    points.iter().map(|p| p.iter().map(|&v| q(v)).collect()).collect()
}

fn sub(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: P3, b: P3) -> P3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: P3, b: P3) -> i64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Facets as vertex sets: every plane through three points with all points on one side.
/// Returns `None` for coplanar input.
fn brute_force_supports(points: &[P3]) -> Option<BTreeSet<Vec<usize>>> {
    let mut out = BTreeSet::new();
    let mut full_dim = false;
    let n = points.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let normal = cross(sub(points[j], points[i]), sub(points[k], points[i]));
                if normal == [0, 0, 0] {
                    continue;
                }
                let s: Vec<i64> = points.iter().map(|&p| dot(normal, sub(p, points[i]))).collect();
                let pos = s.iter().any(|&v| v > 0);
                let neg = s.iter().any(|&v| v < 0);
                full_dim |= pos || neg;
                if !(pos && neg) && (pos || neg) {
                    out.insert((0..n).filter(|&t| s[t] == 0).collect());
                }
            }
        }
    }
    full_dim.then_some(out)
}

fn points3() -> impl Strategy<Value = Vec<P3>> {
    prop::collection::vec(prop::array::uniform3(-3i64..=3), 4..11)
}

/// True when dropping facet `skip` lets some point of a large box violate it.
fn is_irredundant(facets: &[hybrid_bell_solver::Facet<Rational>], skip: usize) -> bool {
    let d = facets[skip].normal.len();
    let mut p: LpProblem<Rational> = LpProblem::new(d).minimize(facets[skip].normal.clone());
    for j in 0..d {
        p.set_bounds(j, Some(q(-100)), Some(q(100)));
    }
    for (i, f) in facets.iter().enumerate() {
        if i != skip {
            // offset + normal·y ≥ 0
            p.add_ge(f.normal.clone(), -f.offset.clone());
        }
    }
    let sol = lp_solve(&p).unwrap().optimal().expect("box keeps the problem bounded");
    (sol.objective + facets[skip].offset.clone()).is_neg()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn facets_match_brute_force(points in points3()) {
        let Some(expected) = brute_force_supports(&points) else {
            prop_assert!(matches!(double_description(&to_rational(&points)).unwrap(), HullOutcome::Degenerate(_)));
            return Ok(());
        };
        let rp = to_rational(&points);
        let HullOutcome::Facets(facets) = double_description(&rp).unwrap() else {
            return Err(TestCaseError::fail("full-dimensional input reported degenerate"));
        };
        let got: BTreeSet<Vec<usize>> = facets.iter().map(|f| {
            let mut s = f.support.clone();
            s.sort();
            s
        }).collect();
        prop_assert_eq!(got.len(), facets.len(), "duplicate facets");
        prop_assert_eq!(&got, &expected);
        for f in &facets {
            for (i, v) in rp.iter().enumerate() {
                let val = f.eval(v);
                prop_assert!(!val.is_neg());
                prop_assert_eq!(val == q(0), f.support.contains(&i));
            }
        }
    }

    #[test]
    fn every_facet_is_irredundant(points in points3()) {
        if let HullOutcome::Facets(facets) = double_description(&to_rational(&points)).unwrap() {
            for k in 0..facets.len() {
                prop_assert!(is_irredundant(&facets, k));
            }
        }
    }
}

#[test]
fn cube_and_octahedron() {
    let cube: Vec<P3> = vec![[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0], [0, 0, 1], [1, 0, 1], [0, 1, 1], [1, 1, 1]];
    let HullOutcome::Facets(f) = double_description(&to_rational(&cube)).unwrap() else { panic!() };
    assert_eq!(f.len(), 6);
    assert!(f.iter().all(|x| x.support.len() == 4));

    let octahedron: Vec<P3> = vec![[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
    let HullOutcome::Facets(f) = double_description(&to_rational(&octahedron)).unwrap() else { panic!() };
    assert_eq!(f.len(), 8);
}

#[test]
fn simplex_in_five_dimensions() {
    let mut pts = vec![vec![q(0); 5]];
    for i in 0..5 {
        let mut e = vec![q(0); 5];
        e[i] = q(1);
        pts.push(e);
    }
    let HullOutcome::Facets(f) = double_description(&pts).unwrap() else { panic!() };
    assert_eq!(f.len(), 6);
    assert!(f.iter().all(|x| x.support.len() == 5));
}

#[test]
fn planar_input_is_degenerate() {
    let pts: Vec<P3> = vec![[0, 0, 1], [1, 0, 1], [0, 1, 1], [1, 1, 1]];
    match double_description(&to_rational(&pts)).unwrap() {
        HullOutcome::Degenerate(h) => {
            assert_eq!(h.dimension, 2);
            assert_eq!(h.equations.len(), 1);
        }
        HullOutcome::Facets(_) => panic!("expected degenerate"),
    }
}
