//! Instrumental scenarios, extended (observational + interventional) behaviors and correlators.

use hybrid_bell_solver::Scalar;

use crate::HybridError;

/// Instrumental scenario `X → A → B` with `l` instrument settings and binary outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Scenario {
    l: usize,
}

impl Scenario {
    pub fn new(l: usize) -> Result<Self, HybridError> {
        if l < 2 {
            return Err(HybridError::Domain(format!("need at least two instrument settings, got {l}")));
        }
        Ok(Scenario { l })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn outcomes_a(&self) -> usize {
        2
    }

    pub fn outcomes_b(&self) -> usize {
        2
    }

    /// Number of deterministic strategies, `2^l · 4`.
    pub fn num_strategies(&self) -> usize {
        (1 << self.l) * 4
    }
}

/// Observational table `p(a,b|x)` plus interventional table `p(b|do(a))`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedBehavior<T> {
    obs: Vec<[[T; 2]; 2]>,
    do_: [[T; 2]; 2],
}

/// A violated constraint found by [`ExtendedBehavior::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    ObsRange { x: usize, a: usize, b: usize, value: f64 },
    DoRange { a: usize, b: usize, value: f64 },
    ObsNormalization { x: usize, sum: f64 },
    DoNormalization { a: usize, sum: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::ObsRange { x, a, b, value } => write!(f, "p({a},{b}|{x}) = {value} outside [0,1]"),
            Violation::DoRange { a, b, value } => write!(f, "p({b}|do {a}) = {value} outside [0,1]"),
            Violation::ObsNormalization { x, sum } => write!(f, "observational row x={x} sums to {sum}"),
            Violation::DoNormalization { a, sum } => write!(f, "interventional row a={a} sums to {sum}"),
        }
    }
}

fn validation_tolerance<T: Scalar>() -> T {
    if T::is_exact() {
        T::zero()
    } else {
        T::from_f64_lossy(1e-12)
    }
}

impl<T: Scalar> ExtendedBehavior<T> {
    /// Wraps the tables; only the scenario size is checked here, see [`Self::validate`].
    pub fn new(obs: Vec<[[T; 2]; 2]>, do_: [[T; 2]; 2]) -> Result<Self, HybridError> {
        Scenario::new(obs.len())?;
        Ok(ExtendedBehavior { obs, do_ })
    }

    /// Builds from nested vectors, checking the `(l,2,2)` and `(2,2)` shapes.
    pub fn from_nested(obs: Vec<Vec<Vec<T>>>, do_: Vec<Vec<T>>) -> Result<Self, HybridError> {
        let pair = |v: Vec<T>, what: &str| -> Result<[T; 2], HybridError> {
            <[T; 2]>::try_from(v).map_err(|v| HybridError::Structural(format!("{what}: expected 2 entries, got {}", v.len())))
        };
        let table = |t: Vec<Vec<T>>, what: &str| -> Result<[[T; 2]; 2], HybridError> {
            if t.len() != 2 {
                return Err(HybridError::Structural(format!("{what}: expected 2 rows, got {}", t.len())));
            }
            let mut it = t.into_iter();
            Ok([pair(it.next().unwrap(), what)?, pair(it.next().unwrap(), what)?])
        };
        let obs = obs
            .into_iter()
            .enumerate()
            .map(|(x, t)| table(t, &format!("obs[{x}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let do_ = table(do_, "do")?;
        if obs.len() < 2 {
            return Err(HybridError::Structural(format!("obs must have at least 2 settings, got {}", obs.len())));
        }
        Ok(ExtendedBehavior { obs, do_ })
    }

    pub fn l(&self) -> usize {
        self.obs.len()
    }

    pub fn scenario(&self) -> Scenario {
        Scenario { l: self.l() }
    }

    /// `p(a,b|x)`.
    pub fn obs(&self, x: usize, a: usize, b: usize) -> &T {
        &self.obs[x][a][b]
    }

    /// `p(b|do(a))`.
    pub fn do_(&self, a: usize, b: usize) -> &T {
        &self.do_[a][b]
    }

    pub fn obs_table(&self) -> &[[[T; 2]; 2]] {
        &self.obs
    }

    pub fn do_table(&self) -> &[[T; 2]; 2] {
        &self.do_
    }

    /// `p(a|x)`.
    pub fn marginal_a(&self, x: usize, a: usize) -> T {
        self.obs[x][a][0].clone() + self.obs[x][a][1].clone()
    }

    /// `p(b|x)`.
    pub fn marginal_b(&self, x: usize, b: usize) -> T {
        self.obs[x][0][b].clone() + self.obs[x][1][b].clone()
    }

    /// Lists range and normalization violations (empty means valid).
    pub fn validate(&self) -> Vec<Violation> {
        let tol = validation_tolerance::<T>();
        let one = T::one();
        let out_of_range = |v: &T| *v < -tol.clone() || *v > one.clone() + tol.clone();
        let mut out = Vec::new();
        for (x, t) in self.obs.iter().enumerate() {
            let mut sum = T::zero();
            for a in 0..2 {
                for b in 0..2 {
                    if out_of_range(&t[a][b]) {
                        out.push(Violation::ObsRange { x, a, b, value: t[a][b].to_f64_lossy() });
                    }
                    sum += t[a][b].clone();
                }
            }
            if (sum.clone() - T::one()).abs() > tol {
                out.push(Violation::ObsNormalization { x, sum: sum.to_f64_lossy() });
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                if out_of_range(&self.do_[a][b]) {
                    out.push(Violation::DoRange { a, b, value: self.do_[a][b].to_f64_lossy() });
                }
            }
            let sum = self.do_[a][0].clone() + self.do_[a][1].clone();
            if (sum.clone() - T::one()).abs() > tol {
                out.push(Violation::DoNormalization { a, sum: sum.to_f64_lossy() });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Returns `self` if valid, otherwise a domain error listing the violations.
    pub fn validated(self) -> Result<Self, HybridError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            let msg: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            Err(HybridError::Domain(format!("invalid behavior: {}", msg.join("; "))))
        }
    }

    /// Uniform behavior: `p(a,b|x) = 1/4`, `p(b|do(a)) = 1/2`.
    pub fn uniform(l: usize) -> Result<Self, HybridError> {
        let q = T::from_ratio(1, 4);
        let h = T::from_ratio(1, 2);
        Self::new(vec![[[q.clone(), q.clone()], [q.clone(), q.clone()]]; l], [[h.clone(), h.clone()], [h.clone(), h]])
    }

    /// Average causal effect `max_{a,a',b} |p(b|do a) − p(b|do a')|`.
    pub fn ace(&self) -> T {
        let mut best = T::zero();
        for b in 0..2 {
            let d = (self.do_[0][b].clone() - self.do_[1][b].clone()).abs();
            if d > best {
                best = d;
            }
        }
        best
    }

    /// All entries flattened as `obs[x][a][b]` (row-major) followed by `do[a][b]`.
    pub fn to_vector(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(4 * self.l() + 4);
        for t in &self.obs {
            for row in t {
                v.extend(row.iter().cloned());
            }
        }
        for row in &self.do_ {
            v.extend(row.iter().cloned());
        }
        v
    }

    /// Inverse of [`Self::to_vector`].
    pub fn from_vector(l: usize, v: &[T]) -> Result<Self, HybridError> {
        if v.len() != 4 * l + 4 {
            return Err(HybridError::Structural(format!("expected {} entries, got {}", 4 * l + 4, v.len())));
        }
        let obs = (0..l)
            .map(|x| {
                let o = 4 * x;
                [[v[o].clone(), v[o + 1].clone()], [v[o + 2].clone(), v[o + 3].clone()]]
            })
            .collect();
        let o = 4 * l;
        Self::new(obs, [[v[o].clone(), v[o + 1].clone()], [v[o + 2].clone(), v[o + 3].clone()]])
    }

    /// Convex combination `Σ w_i · b_i`.
    pub fn mixture(parts: &[(T, &ExtendedBehavior<T>)]) -> Result<Self, HybridError> {
        let Some((_, first)) = parts.first() else {
            return Err(HybridError::Domain("empty mixture".into()));
        };
        let l = first.l();
        let mut acc = vec![T::zero(); 4 * l + 4];
        for (w, b) in parts {
            if b.l() != l {
                return Err(HybridError::Structural("mixture of behaviors with different l".into()));
            }
            for (a, v) in acc.iter_mut().zip(b.to_vector()) {
                *a += w.clone() * v;
            }
        }
        Self::from_vector(l, &acc)
    }

    pub fn to_f64(&self) -> ExtendedBehavior<f64> {
        let conv = |t: &[[T; 2]; 2]| [[t[0][0].to_f64_lossy(), t[0][1].to_f64_lossy()], [t[1][0].to_f64_lossy(), t[1][1].to_f64_lossy()]];
        ExtendedBehavior { obs: self.obs.iter().map(conv).collect(), do_: conv(&self.do_) }
    }

    pub fn from_f64(b: &ExtendedBehavior<f64>) -> Self {
        let conv = |t: &[[f64; 2]; 2]| [[T::from_f64_lossy(t[0][0]), T::from_f64_lossy(t[0][1])], [T::from_f64_lossy(t[1][0]), T::from_f64_lossy(t[1][1])]];
        ExtendedBehavior { obs: b.obs.iter().map(conv).collect(), do_: conv(&b.do_) }
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_vector()
            .iter()
            .zip(other.to_vector())
            .map(|(a, b)| (a.clone() - b).abs().to_f64_lossy())
            .fold(0.0, f64::max)
    }

    pub fn to_correlators(&self) -> Correlators<T> {
        let sign = |k: usize| if k % 2 == 0 { T::one() } else { -T::one() };
        let l = self.l();
        let mut c = Correlators { ab: Vec::with_capacity(l), a: Vec::with_capacity(l), b: Vec::with_capacity(l), b_do: [T::zero(), T::zero()] };
        for t in &self.obs {
            let mut ab = T::zero();
            let mut a_ = T::zero();
            let mut b_ = T::zero();
            for a in 0..2 {
                for b in 0..2 {
                    ab += sign(a + b) * t[a][b].clone();
                    a_ += sign(a) * t[a][b].clone();
                    b_ += sign(b) * t[a][b].clone();
                }
            }
            c.ab.push(ab);
            c.a.push(a_);
            c.b.push(b_);
        }
        for a in 0..2 {
            c.b_do[a] = self.do_[a][0].clone() - self.do_[a][1].clone();
        }
        c
    }
}

/// Correlators `⟨AB⟩_x`, `⟨A⟩_x`, `⟨B⟩_x` and `⟨B⟩_{do(a)}` (outcome 0 ↦ +1).
#[derive(Clone, Debug, PartialEq)]
pub struct Correlators<T> {
    pub ab: Vec<T>,
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub b_do: [T; 2],
}

impl<T: Scalar> Correlators<T> {
    /// Inverts [`ExtendedBehavior::to_correlators`]; fails if an implied probability leaves `[0,1]`.
    pub fn to_behavior(&self) -> Result<ExtendedBehavior<T>, HybridError> {
        let l = self.ab.len();
        if self.a.len() != l || self.b.len() != l {
            return Err(HybridError::Structural("correlator vectors have different lengths".into()));
        }
        let sign = |k: usize| if k % 2 == 0 { T::one() } else { -T::one() };
        let quarter = T::from_ratio(1, 4);
        let half = T::from_ratio(1, 2);
        let mut obs = Vec::with_capacity(l);
        for x in 0..l {
            let mut t = [[T::zero(), T::zero()], [T::zero(), T::zero()]];
            for a in 0..2 {
                for b in 0..2 {
                    t[a][b] = quarter.clone()
                        * (T::one() + sign(a) * self.a[x].clone() + sign(b) * self.b[x].clone() + sign(a + b) * self.ab[x].clone());
                }
            }
            obs.push(t);
        }
        let mut do_ = [[T::zero(), T::zero()], [T::zero(), T::zero()]];
        for a in 0..2 {
            for b in 0..2 {
                do_[a][b] = half.clone() * (T::one() + sign(b) * self.b_do[a].clone());
            }
        }
        let beh = ExtendedBehavior::new(obs, do_)?;
        let tol = validation_tolerance::<T>();
        let bad = beh.to_vector().into_iter().find(|v| *v < -tol.clone() || *v > T::one() + tol.clone());
        match bad {
            Some(v) => Err(HybridError::Domain(format!("correlators imply probability {v} outside [0,1]"))),
            None => Ok(beh),
        }
    }
}

pub fn from_correlators<T: Scalar>(c: &Correlators<T>) -> Result<ExtendedBehavior<T>, HybridError> {
    c.to_behavior()
}

/// Deterministic classical strategy `a = f(x)`, `b = g(a)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeterministicStrategy {
    pub f: Vec<u8>,
    pub g: [u8; 2],
}

impl DeterministicStrategy {
    pub fn new(f: Vec<u8>, g: [u8; 2]) -> Result<Self, HybridError> {
        if f.iter().chain(g.iter()).any(|&v| v > 1) {
            return Err(HybridError::Domain("strategy values must be 0 or 1".into()));
        }
        Scenario::new(f.len())?;
        Ok(DeterministicStrategy { f, g })
    }

    /// All `2^l · 4` strategies, `f` as the bits of the high index and `g` as the low two bits.
    pub fn all(s: Scenario) -> Vec<DeterministicStrategy> {
        let l = s.l();
        (0..s.num_strategies())
            .map(|k| {
                let fbits = k >> 2;
                DeterministicStrategy {
                    f: (0..l).map(|x| ((fbits >> x) & 1) as u8).collect(),
                    g: [(k & 1) as u8, ((k >> 1) & 1) as u8],
                }
            })
            .collect()
    }

    pub fn behavior<T: Scalar>(&self) -> ExtendedBehavior<T> {
        from_strategy(self)
    }
}

/// Extended behavior of a deterministic strategy.
pub fn from_strategy<T: Scalar>(s: &DeterministicStrategy) -> ExtendedBehavior<T> {
    let ind = |c: bool| if c { T::one() } else { T::zero() };
    let obs = s
        .f
        .iter()
        .map(|&fx| {
            let mut t = [[T::zero(), T::zero()], [T::zero(), T::zero()]];
            for a in 0..2 {
                for b in 0..2 {
                    t[a][b] = ind(a == fx as usize && b == s.g[a] as usize);
                }
            }
            t
        })
        .collect();
    let mut do_ = [[T::zero(), T::zero()], [T::zero(), T::zero()]];
    for a in 0..2 {
        for b in 0..2 {
            do_[a][b] = ind(b == s.g[a] as usize);
        }
    }
    ExtendedBehavior { obs, do_ }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Behavior;

    fn b(obs: Vec<[[f64; 2]; 2]>, do_: [[f64; 2]; 2]) -> Behavior {
        Behavior::new(obs, do_).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(Behavior::uniform(2).unwrap().validate().is_empty());
        let over = b(vec![[[1.2, 0.0], [0.0, 0.0]], [[0.25; 2]; 2]], [[0.5; 2]; 2]);
        assert!(over.validate().iter().any(|v| matches!(v, Violation::ObsRange { x: 0, a: 0, b: 0, .. })));
        let short = b(vec![[[0.2, 0.2], [0.25, 0.25]], [[0.25; 2]; 2]], [[0.5; 2]; 2]);
        assert!(short.validate().iter().any(|v| matches!(v, Violation::ObsNormalization { x: 0, .. })));
    }

    #[test]
    fn shape_errors_are_structural() {
        let r = Behavior::from_nested(vec![vec![vec![0.5, 0.5]], vec![vec![0.5, 0.5]]], vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert!(matches!(r, Err(HybridError::Structural(_))));
    }

    #[test]
    fn strategy_examples() {
        let s = Scenario::new(2).unwrap();
        let zero: Behavior = from_strategy(&DeterministicStrategy::new(vec![0, 0], [0, 0]).unwrap());
        assert_eq!(*zero.obs(0, 0, 0), 1.0);
        assert_eq!(*zero.obs(1, 0, 0), 1.0);
        assert_eq!(*zero.do_(0, 0), 1.0);
        assert_eq!(*zero.do_(1, 0), 1.0);

        let id: Behavior = from_strategy(&DeterministicStrategy::new(vec![0, 1], [0, 1]).unwrap());
        assert_eq!(*id.obs(0, 0, 0), 1.0);
        assert_eq!(*id.obs(1, 1, 1), 1.0);
        assert_eq!(*id.do_(0, 0), 1.0);
        assert_eq!(*id.do_(1, 1), 1.0);

        let flip: Behavior = from_strategy(&DeterministicStrategy::new(vec![1, 1], [1, 0]).unwrap());
        assert_eq!(*flip.obs(0, 1, 0), 1.0);
        assert_eq!(*flip.do_(0, 1), 1.0);
        assert_eq!(*flip.do_(1, 0), 1.0);

        let all = DeterministicStrategy::all(s);
        assert_eq!(all.len(), 16);
        for st in &all {
            let v: Behavior = from_strategy(st);
            assert!(v.is_valid());
            assert!(v.ace() == 0.0 || v.ace() == 1.0);
        }
    }

    #[test]
    fn ace_examples() {
        let obs = vec![[[0.25; 2]; 2]; 2];
        assert_eq!(b(obs.clone(), [[1.0, 0.0], [0.0, 1.0]]).ace(), 1.0);
        assert_eq!(b(obs.clone(), [[0.5, 0.5], [0.5, 0.5]]).ace(), 0.0);
        assert!((b(obs, [[0.8, 0.2], [0.3, 0.7]]).ace() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn correlator_examples() {
        let c = Behavior::uniform(3).unwrap().to_correlators();
        assert!(c.ab.iter().chain(&c.a).chain(&c.b).chain(&c.b_do).all(|v| *v == 0.0));
        let id: Behavior = from_strategy(&DeterministicStrategy::new(vec![0, 1], [0, 1]).unwrap());
        let c = id.to_correlators();
        assert_eq!(c.ab, vec![1.0, 1.0]);
        assert_eq!(c.b_do, [1.0, -1.0]);
        assert_eq!(c.to_behavior().unwrap(), id);
    }

    #[test]
    fn inconsistent_correlators_rejected() {
        let c = Correlators { ab: vec![1.0, 1.0], a: vec![1.0, 0.0], b: vec![-1.0, 0.0], b_do: [0.0, 0.0] };
        assert!(matches!(c.to_behavior(), Err(HybridError::Domain(_))));
    }
}
