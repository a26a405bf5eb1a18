//! Classical observational-interventional polytope: inequality families, membership and facets.

pub mod facets;
pub mod functional;
pub mod membership;
pub mod relabel;

use hybrid_bell_solver::Scalar;

pub use facets::{enumerate_facets, FacetClass, FacetOrbit, FacetReport};
pub use functional::{AceBound, Instrumental, LinearFunctional};
pub use membership::{membership_constructive, membership_lp, ConstructiveOutcome, JointDistribution, LpMembership};
pub use relabel::Relabeling;

use crate::behavior::{Correlators, ExtendedBehavior};
use crate::HybridError;

/// Value of instrumental inequality `which` on the relabeled behavior `r·b` (classically `≤ 0`).
pub fn eval_instrumental<T: Scalar>(b: &ExtendedBehavior<T>, which: Instrumental, r: &Relabeling) -> Result<T, HybridError> {
    let f = which.value_functional::<T>(b.l())?;
    Ok(f.eval(&r.apply(b)?))
}

/// `(C_i, ace(b) ≥ C_i)`.
pub fn eval_ace_bound<T: Scalar>(b: &ExtendedBehavior<T>, which: AceBound) -> Result<(T, bool), HybridError> {
    let c = which.functional::<T>(b.l())?.eval(b);
    let ok = b.ace() >= c.clone() - T::tolerance();
    Ok((c, ok))
}

/// `p(b|do a) − p(a,b|x)`.
pub fn eval_trivial<T: Scalar>(p: &ExtendedBehavior<T>, a: usize, b: usize, x: usize) -> T {
    p.do_(a, b).clone() - p.obs(x, a, b).clone()
}

/// Smallest trivial-class value over all index choices.
pub fn trivial_min<T: Scalar>(p: &ExtendedBehavior<T>) -> T {
    let mut best: Option<T> = None;
    for x in 0..p.l() {
        for a in 0..2 {
            for b in 0..2 {
                let v = eval_trivial(p, a, b, x);
                if best.as_ref().is_none_or(|m| v < *m) {
                    best = Some(v);
                }
            }
        }
    }
    best.expect("l ≥ 2")
}

/// `p(b|do a) − p(a,b|x') + p(a,b̄|x) + p(ā,b|x) − p(ā,b|x')`.
#[allow(non_snake_case)]
pub fn eval_Il22<T: Scalar>(p: &ExtendedBehavior<T>, a: usize, b: usize, x: usize, xp: usize) -> Result<T, HybridError> {
    Ok(LinearFunctional::il22(p.l(), a, b, x, xp)?.eval(p))
}

/// Minimum of the I_l22 functional over every relabeling, with the minimizing functional.
pub fn il22_min<T: Scalar>(p: &ExtendedBehavior<T>) -> (T, LinearFunctional<T>) {
    let base = LinearFunctional::il22(p.l(), 0, 0, 0, 1).expect("l ≥ 2");
    let mut best: Option<(T, LinearFunctional<T>)> = None;
    for f in base.orbit() {
        let v = f.eval(p);
        if best.as_ref().is_none_or(|(m, _)| v < *m) {
            best = Some((v, f));
        }
    }
    best.expect("orbit is non-empty")
}

/// The two correlator-form expressions for settings `(x, x')`; classically both are `≤ 0`.
#[allow(non_snake_case)]
pub fn eval_Il22_correlator<T: Scalar>(c: &Correlators<T>, x: usize, xp: usize) -> Result<(T, T), HybridError> {
    let l = c.ab.len();
    if x == xp || x >= l || xp >= l {
        return Err(HybridError::Domain(format!("correlator form needs distinct settings below {l}, got x={x}, x'={xp}")));
    }
    let two = T::one() + T::one();
    let lhs1 = (c.ab[x].clone() - c.b[x].clone() + two * c.b_do[1].clone()).abs() - T::one() - c.a[x].clone();
    let lhs2 = (c.ab[x].clone() - c.b[xp].clone() + c.b_do[1].clone()).abs() - T::one();
    Ok((lhs1, lhs2))
}

/// Largest correlator-form value over all relabelings and setting pairs.
///
/// The correlator form covers one representative per orbit, so a sign comparison with
/// [`il22_min`] needs the maximum over the whole group.
pub fn correlator_max<T: Scalar>(p: &ExtendedBehavior<T>) -> Result<T, HybridError> {
    let l = p.l();
    let mut best: Option<T> = None;
    for r in Relabeling::all(l) {
        let c = r.apply(p)?.to_correlators();
        for x in 0..l {
            for xp in 0..l {
                if x == xp {
                    continue;
                }
                let (u, v) = eval_Il22_correlator(&c, x, xp)?;
                for w in [u, v] {
                    if best.as_ref().is_none_or(|m| w > *m) {
                        best = Some(w);
                    }
                }
            }
        }
    }
    Ok(best.expect("l ≥ 2"))
}

/// True when every trivial and I_l22 inequality holds up to `tol`.
pub fn satisfies_all<T: Scalar>(p: &ExtendedBehavior<T>, tol: &T) -> bool {
    trivial_min(p) >= -tol.clone() && il22_min(p).0 >= -tol.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{from_strategy, DeterministicStrategy, Scenario};
    use crate::Rational;

    fn uniform() -> ExtendedBehavior<f64> {
        ExtendedBehavior::uniform(2).unwrap()
    }

    #[test]
    fn instrumental_examples() {
        let id = Relabeling::identity(2);
        assert!((eval_instrumental(&uniform(), Instrumental::I1, &id).unwrap() + 0.5).abs() < 1e-12);
        let mut obs = vec![[[0.0; 2]; 2]; 2];
        obs[0][0][0] = 1.0;
        obs[1][0][1] = 1.0;
        let p = ExtendedBehavior::new(obs, [[0.5; 2]; 2]).unwrap();
        assert_eq!(eval_instrumental(&p, Instrumental::I1, &id).unwrap(), 1.0);
        assert!(eval_instrumental(&uniform(), Instrumental::I2, &id).is_err());
        for l in 2..=4 {
            for s in DeterministicStrategy::all(Scenario::new(l).unwrap()) {
                let v: ExtendedBehavior<Rational> = from_strategy(&s);
                for (i, which) in [Instrumental::I1, Instrumental::I2, Instrumental::I3].into_iter().enumerate() {
                    if l >= which.min_settings() {
                        let r = Relabeling::identity(l);
                        assert!(eval_instrumental(&v, which, &r).unwrap() <= Rational::from_integer(0.into()), "ℐ{} on {s:?}", i + 1);
                    }
                }
            }
        }
    }

    #[test]
    fn ace_bound_examples() {
        let s = DeterministicStrategy::new(vec![0, 1], [0, 1]).unwrap();
        let (c, ok) = eval_ace_bound(&from_strategy::<f64>(&s), AceBound::C1).unwrap();
        assert_eq!((c, ok), (1.0, true));
        let (c, ok) = eval_ace_bound(&uniform(), AceBound::C1).unwrap();
        assert!((c + 0.75).abs() < 1e-12 && ok);
        assert!(eval_ace_bound(&uniform(), AceBound::C2).is_err());
    }

    #[test]
    fn trivial_and_il22_examples() {
        assert!((eval_trivial(&uniform(), 0, 0, 0) - 0.25).abs() < 1e-12);
        let s = DeterministicStrategy::new(vec![0, 0], [0, 0]).unwrap();
        let v = from_strategy::<f64>(&s);
        assert_eq!(eval_trivial(&v, 0, 0, 0), 0.0);
        assert!((eval_Il22(&uniform(), 0, 0, 0, 1).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(eval_Il22(&v, 0, 0, 0, 1).unwrap(), 0.0);
        assert_eq!(eval_Il22(&v, 0, 0, 1, 0).unwrap(), 0.0);
        assert!(eval_Il22(&v, 0, 0, 1, 1).is_err());
    }

    #[test]
    fn vertices_satisfy_both_classes() {
        for l in 2..=3 {
            for s in DeterministicStrategy::all(Scenario::new(l).unwrap()) {
                let v: ExtendedBehavior<Rational> = from_strategy(&s);
                assert!(satisfies_all(&v, &Rational::from_integer(0.into())));
            }
        }
    }

    #[test]
    fn correlator_form_on_uniform() {
        let c = uniform().to_correlators();
        assert_eq!(eval_Il22_correlator(&c, 0, 1).unwrap(), (-1.0, -1.0));
        assert!(eval_Il22_correlator(&c, 1, 1).is_err());
    }

    #[test]
    fn il22_relabeling_invariance() {
        let p = ExtendedBehavior::<f64>::from_nested(
            vec![vec![vec![0.1, 0.2], vec![0.3, 0.4]], vec![vec![0.4, 0.1], vec![0.2, 0.3]]],
            vec![vec![0.6, 0.4], vec![0.7, 0.3]],
        )
        .unwrap();
        let f = LinearFunctional::il22(2, 1, 0, 1, 0).unwrap();
        for r in Relabeling::all(2) {
            let v = f.relabel(&r).eval(&r.apply(&p).unwrap());
            assert!((v - f.eval(&p)).abs() < 1e-12);
        }
    }
}
