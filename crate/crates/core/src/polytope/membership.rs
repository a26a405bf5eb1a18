//! Membership in the classical polytope: an LP over the deterministic vertices, and a
//! direct construction of the hidden joint distribution `Q(a_1,…,a_l,b_0,b_1)`.

use hybrid_bell_solver::lp::{lp_solve, LpOutcome, LpProblem};
use hybrid_bell_solver::Scalar;

use super::functional::LinearFunctional;
use super::{il22_min, trivial_min};
use crate::behavior::{from_strategy, DeterministicStrategy, ExtendedBehavior, Scenario};
use crate::HybridError;

/// Largest `l` accepted by [`membership_lp`] (`2^(l+2)` LP columns).
pub const MAX_LP_SETTINGS: usize = 8;
/// Largest `l` accepted by [`membership_constructive`] (`2^(l+2)` table entries).
pub const MAX_JOINT_SETTINGS: usize = 16;

fn decision_tolerance<T: Scalar>() -> T {
    if T::is_exact() {
        T::zero()
    } else {
        T::from_f64_lossy(1e-9)
    }
}

#[derive(Clone, Debug)]
pub enum LpMembership<T> {
    /// Convex weights on deterministic strategies, zero weights omitted.
    Member { decomposition: Vec<(DeterministicStrategy, T)>, margin: T },
    /// `certificate ≥ 0` on every vertex and equals `1/2` on the uniform behavior;
    /// `violation` is its (negative) value on the input.
    NonMember { certificate: LinearFunctional<T>, violation: T },
}

impl<T> LpMembership<T> {
    pub fn is_member(&self) -> bool {
        matches!(self, LpMembership::Member { .. })
    }
}

/// Decides whether `b` is a convex combination of deterministic behaviors.
///
/// Solves `max μ` subject to `b = Σ w_v v + μ u`, `Σ w_v + μ = 1`, `w ≥ 0`, with `u` the
/// uniform behavior. The optimum is non-negative exactly for members; otherwise the LP dual is a
/// separating functional.
pub fn membership_lp<T: Scalar>(b: &ExtendedBehavior<T>) -> Result<LpMembership<T>, HybridError> {
    let l = b.l();
    if l > MAX_LP_SETTINGS {
        return Err(HybridError::Capacity(format!("membership LP supports l ≤ {MAX_LP_SETTINGS}, got {l}")));
    }
    let strategies = DeterministicStrategy::all(Scenario::new(l)?);
    let vertices: Vec<Vec<T>> = strategies.iter().map(|s| from_strategy::<T>(s).to_vector()).collect();
    let u = ExtendedBehavior::<T>::uniform(l)?.to_vector();
    let target = b.to_vector();
    let nv = vertices.len();
    let mu = nv;

    let mut c = vec![T::zero(); nv + 1];
    c[mu] = -T::one();
    let mut lp = LpProblem::new(nv + 1).minimize(c);
    lp.set_bounds(mu, None, None);
    for (k, tk) in target.iter().enumerate() {
        let mut row: Vec<T> = vertices.iter().map(|v| v[k].clone()).collect();
        row.push(u[k].clone());
        lp.add_eq(row, tk.clone());
    }
    lp.add_eq(vec![T::one(); nv + 1], T::one());

    let sol = match lp_solve(&lp)? {
        LpOutcome::Optimal(s) => s,
        other => {
            return Err(HybridError::Solver(hybrid_bell_solver::SolverError::Numerical(format!(
                "membership LP should be feasible and bounded, got {}",
                match other {
                    LpOutcome::Infeasible(_) => "infeasible",
                    _ => "unbounded",
                }
            ))))
        }
    };
    let mu_star = sol.x[mu].clone();
    if mu_star >= -decision_tolerance::<T>() {
        let share = mu_star.clone() / T::from_usize(nv).expect("vertex count");
        let decomposition = strategies
            .into_iter()
            .zip(&sol.x[..nv])
            .filter_map(|(s, w)| {
                let w = w.clone() + share.clone();
                (w.is_pos()).then_some((s, w))
            })
            .collect();
        return Ok(LpMembership::Member { decomposition, margin: mu_star });
    }
    // F(p) = −(y·p + y₀) is ≥ 0 on vertices with F(u) = 1 and F(b) = μ*; report F/2.
    let half = T::from_ratio(1, 2);
    let y0 = sol.eq_duals[target.len()].clone();
    let mut v = vec![-y0 * half.clone()];
    v.extend(sol.eq_duals[..target.len()].iter().map(|y| -y.clone() * half.clone()));
    let certificate = LinearFunctional::from_vector(l, &v);
    let violation = certificate.eval(b);
    Ok(LpMembership::NonMember { certificate, violation })
}

/// Probability table over `(a_1,…,a_l, b_0, b_1)`, where `b_a` is B's response to `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution<T> {
    l: usize,
    /// Index `(a-bits << 2) | (b_0 << 1) | b_1`, bit `x` of the a-bits holding `a_x`.
    probs: Vec<T>,
}

impl<T: Scalar> JointDistribution<T> {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn get(&self, a: &[u8], b0: u8, b1: u8) -> &T {
        let bits = a.iter().enumerate().fold(0usize, |acc, (x, &ax)| acc | ((ax as usize) << x));
        &self.probs[(bits << 2) | ((b0 as usize) << 1) | b1 as usize]
    }

    pub fn entries(&self) -> &[T] {
        &self.probs
    }

    pub fn total(&self) -> T {
        self.probs.iter().fold(T::zero(), |acc, p| acc + p.clone())
    }

    pub fn min_entry(&self) -> T {
        self.probs.iter().cloned().fold(T::one(), |m, p| if p < m { p } else { m })
    }

    /// The extended behavior this distribution induces: `p(a,b|x) = Q(a_x = a, b_a = b)` and
    /// `p(b|do a) = Q(b_a = b)`.
    pub fn marginal_behavior(&self) -> Result<ExtendedBehavior<T>, HybridError> {
        let zero = || [[T::zero(), T::zero()], [T::zero(), T::zero()]];
        let mut obs = vec![zero(); self.l];
        let mut do_ = zero();
        for (k, p) in self.probs.iter().enumerate() {
            let bs = [(k >> 1) & 1, k & 1];
            let abits = k >> 2;
            for (x, t) in obs.iter_mut().enumerate() {
                let a = (abits >> x) & 1;
                t[a][bs[a]] += p.clone();
            }
            for a in 0..2 {
                do_[a][bs[a]] += p.clone();
            }
        }
        ExtendedBehavior::new(obs, do_)
    }

    /// Deterministic point mass at a strategy.
    pub fn point_mass(s: &DeterministicStrategy) -> Self {
        let l = s.f.len();
        let mut probs = vec![T::zero(); 1 << (l + 2)];
        let bits = s.f.iter().enumerate().fold(0usize, |acc, (x, &ax)| acc | ((ax as usize) << x));
        probs[(bits << 2) | ((s.g[0] as usize) << 1) | s.g[1] as usize] = T::one();
        JointDistribution { l, probs }
    }
}

#[derive(Clone, Debug)]
pub enum ConstructiveOutcome<T> {
    Feasible {
        joint: JointDistribution<T>,
        /// Some inequality is within the boundary tolerance of zero.
        boundary: bool,
    },
    Infeasible {
        /// Smallest trivial or I_l22 value over all relabelings.
        worst: T,
        boundary: bool,
    },
}

impl<T> ConstructiveOutcome<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, ConstructiveOutcome::Feasible { .. })
    }
}

/// Bound `offset + slope·s` with `slope ∈ {0, 1}`.
#[derive(Clone)]
struct Affine<T> {
    offset: T,
    slope_one: bool,
}

impl<T: Scalar> Affine<T> {
    fn constant(c: T) -> Self {
        Affine { offset: c, slope_one: false }
    }

    fn shifted(c: T) -> Self {
        Affine { offset: c, slope_one: true }
    }

    fn at(&self, s: &T) -> T {
        if self.slope_one {
            self.offset.clone() + s.clone()
        } else {
            self.offset.clone()
        }
    }
}

/// Builds `Q = q(b_0,b_1)·Π_x q(a_x|b_0,b_1)` reproducing `b`, if one exists.
///
/// `s = q(b_0 = 0, b_1 = 0)` is shared by all settings and `t_x = q(a_x = 0, b_0 = 0, b_1 = 0)`
/// is free per setting; every other entry follows from the marginals. Each entry is affine in
/// `(s, t_x)`, so feasibility reduces to a non-empty interval for `s`; both parameters are taken
/// at the midpoints of their intervals.
pub fn membership_constructive<T: Scalar>(b: &ExtendedBehavior<T>) -> Result<ConstructiveOutcome<T>, HybridError> {
    let l = b.l();
    if l > MAX_JOINT_SETTINGS {
        return Err(HybridError::Capacity(format!("joint table supports l ≤ {MAX_JOINT_SETTINGS}, got {l}")));
    }
    let tol = decision_tolerance::<T>();
    let boundary_tol = T::from_f64_lossy(1e-9);
    let worst = {
        let t = trivial_min(b);
        let i = il22_min(b).0;
        if t < i {
            t
        } else {
            i
        }
    };
    let boundary = worst.abs() <= boundary_tol;

    let p0d0 = b.do_(0, 0).clone();
    let p0d1 = b.do_(1, 0).clone();
    let one = T::one();

    let t_bounds = |x: usize| -> (Vec<Affine<T>>, Vec<Affine<T>>) {
        let p00 = b.obs(x, 0, 0).clone();
        let p01 = b.obs(x, 0, 1).clone();
        let p10 = b.obs(x, 1, 0).clone();
        let lower = vec![
            Affine::constant(T::zero()),
            Affine::constant(p0d1.clone() - p01.clone() - p10.clone()),
            Affine::shifted(p00.clone() - p0d0.clone()),
            Affine::shifted(-p10.clone()),
        ];
        let upper = vec![
            Affine::constant(p00.clone()),
            Affine::constant(p0d1.clone() - p10.clone()),
            Affine::shifted(T::zero()),
            Affine::shifted(one.clone() - p0d0.clone() - p01 - p10),
        ];
        (lower, upper)
    };

    // Interval for s: q(b_0 b_1) ≥ 0 plus lower_j(s) ≤ upper_k(s) for every setting.
    let mut s_lo = {
        let v = p0d0.clone() + p0d1.clone() - one.clone();
        if v > T::zero() {
            v
        } else {
            T::zero()
        }
    };
    let mut s_hi = if p0d0 < p0d1 { p0d0.clone() } else { p0d1.clone() };
    let mut constant_gap = T::zero();
    for x in 0..l {
        let (lower, upper) = t_bounds(x);
        for lo in &lower {
            for hi in &upper {
                match (lo.slope_one, hi.slope_one) {
                    (false, false) | (true, true) => {
                        let gap = hi.offset.clone() - lo.offset.clone();
                        if gap < constant_gap {
                            constant_gap = gap;
                        }
                    }
                    // lo ≤ s + hi
                    (false, true) => {
                        let v = lo.offset.clone() - hi.offset.clone();
                        if v > s_lo {
                            s_lo = v;
                        }
                    }
                    // s + lo ≤ hi
                    (true, false) => {
                        let v = hi.offset.clone() - lo.offset.clone();
                        if v < s_hi {
                            s_hi = v;
                        }
                    }
                }
            }
        }
    }
    if constant_gap < -tol.clone() || s_lo.clone() > s_hi.clone() + tol.clone() {
        return Ok(ConstructiveOutcome::Infeasible { worst, boundary });
    }
    let half = T::from_ratio(1, 2);
    let s = if s_lo > s_hi { s_lo.clone() } else { (s_lo + s_hi) * half.clone() };

    let q_b = [s.clone(), p0d0.clone() - s.clone(), p0d1.clone() - s.clone(), one.clone() + s.clone() - p0d0.clone() - p0d1.clone()];
    // conditionals q(a_x = 0 | b_0 b_1), indexed [x][b-cell]
    let mut cond0: Vec<[T; 4]> = Vec::with_capacity(l);
    for x in 0..l {
        let (lower, upper) = t_bounds(x);
        let lo = lower.iter().map(|a| a.at(&s)).fold(None::<T>, |m, v| Some(m.map_or(v.clone(), |m| if v > m { v.clone() } else { m })));
        let hi = upper.iter().map(|a| a.at(&s)).fold(None::<T>, |m, v| Some(m.map_or(v.clone(), |m| if v < m { v.clone() } else { m })));
        let (lo, hi) = (lo.expect("bounds"), hi.expect("bounds"));
        let t = if lo > hi { lo } else { (lo + hi) * half.clone() };
        let p00 = b.obs(x, 0, 0).clone();
        let p01 = b.obs(x, 0, 1).clone();
        let p10 = b.obs(x, 1, 0).clone();
        let q0 = [
            t.clone(),
            p00.clone() - t.clone(),
            p0d1.clone() - p10.clone() - t.clone(),
            p01 + p10 + t - p0d1.clone(),
        ];
        let mut c = [T::zero(), T::zero(), T::zero(), T::zero()];
        for cell in 0..4 {
            c[cell] = if q_b[cell].is_zero() { T::zero() } else { q0[cell].clone() / q_b[cell].clone() };
        }
        cond0.push(c);
    }
    let mut probs = vec![T::zero(); 1 << (l + 2)];
    for (k, p) in probs.iter_mut().enumerate() {
        let cell = k & 3;
        let abits = k >> 2;
        let mut v = q_b[cell].clone();
        for (x, c) in cond0.iter().enumerate() {
            v *= if (abits >> x) & 1 == 0 { c[cell].clone() } else { one.clone() - c[cell].clone() };
        }
        *p = v;
    }
    let joint = JointDistribution { l, probs };
    if joint.min_entry() < -tol.clone() {
        return Ok(ConstructiveOutcome::Infeasible { worst, boundary });
    }
    Ok(ConstructiveOutcome::Feasible { joint, boundary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn vertices<T: Scalar>(l: usize) -> Vec<(DeterministicStrategy, ExtendedBehavior<T>)> {
        DeterministicStrategy::all(Scenario::new(l).unwrap()).into_iter().map(|s| (s.clone(), from_strategy(&s))).collect()
    }

    #[test]
    fn uniform_is_member() {
        for l in 2..=4 {
            let u = ExtendedBehavior::<Rational>::uniform(l).unwrap();
            assert!(membership_lp(&u).unwrap().is_member());
            assert!(membership_constructive(&u).unwrap().is_feasible());
        }
    }

    #[test]
    fn vertex_gets_weight_one() {
        for (s, v) in vertices::<Rational>(2) {
            match membership_lp(&v).unwrap() {
                LpMembership::Member { decomposition, .. } => {
                    assert_eq!(decomposition, vec![(s.clone(), Rational::from_integer(1.into()))]);
                }
                other => panic!("vertex rejected: {other:?}"),
            }
        }
    }

    #[test]
    fn vertex_joint_is_point_mass() {
        for l in 2..=3 {
            for (s, v) in vertices::<Rational>(l) {
                match membership_constructive(&v).unwrap() {
                    ConstructiveOutcome::Feasible { joint, .. } => assert_eq!(joint, JointDistribution::point_mass(&s)),
                    other => panic!("vertex rejected: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn joint_marginals_reproduce_mixture() {
        let vs = vertices::<Rational>(3);
        let w = [(1, 3), (1, 6), (1, 4), (1, 4)];
        let parts: Vec<(Rational, &ExtendedBehavior<Rational>)> =
            w.iter().zip([0, 7, 13, 30]).map(|(&(n, d), k)| (Rational::new(n.into(), d.into()), &vs[k].1)).collect();
        let p = ExtendedBehavior::mixture(&parts).unwrap();
        match membership_constructive(&p).unwrap() {
            ConstructiveOutcome::Feasible { joint, .. } => {
                assert_eq!(joint.marginal_behavior().unwrap(), p);
                assert_eq!(joint.total(), Rational::from_integer(1.into()));
            }
            other => panic!("mixture rejected: {other:?}"),
        }
        assert!(membership_lp(&p).unwrap().is_member());
    }

    #[test]
    fn capacity_error_above_eight_settings() {
        let u = ExtendedBehavior::<f64>::uniform(9).unwrap();
        assert!(matches!(membership_lp(&u), Err(HybridError::Capacity(_))));
    }
}
