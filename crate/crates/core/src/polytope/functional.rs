//! Affine functionals on extended behaviors, in the `F(p) ≥ 0` (classical) convention.

use std::collections::BTreeMap;

use hybrid_bell_solver::Scalar;

use super::relabel::Relabeling;
use crate::behavior::ExtendedBehavior;
use crate::HybridError;

/// `F(p) = constant + Σ obs[x][a][b]·p(a,b|x) + Σ do[a][b]·p(b|do a)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearFunctional<T> {
    pub obs: Vec<[[T; 2]; 2]>,
    pub do_: [[T; 2]; 2],
    pub constant: T,
}

fn zero_table<T: Scalar>() -> [[T; 2]; 2] {
    [[T::zero(), T::zero()], [T::zero(), T::zero()]]
}

impl<T: Scalar> LinearFunctional<T> {
    pub fn zero(l: usize) -> Self {
        LinearFunctional { obs: vec![zero_table(); l], do_: zero_table(), constant: T::zero() }
    }

    pub fn l(&self) -> usize {
        self.obs.len()
    }

    pub fn eval(&self, p: &ExtendedBehavior<T>) -> T {
        let mut v = self.constant.clone();
        for (x, t) in self.obs.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    if !t[a][b].is_zero() {
                        v += t[a][b].clone() * p.obs(x, a, b).clone();
                    }
                }
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                if !self.do_[a][b].is_zero() {
                    v += self.do_[a][b].clone() * p.do_(a, b).clone();
                }
            }
        }
        v
    }

    /// Functional `G` with `G(r·p) = F(p)`.
    pub fn relabel(&self, r: &Relabeling) -> Self {
        let (obs, do_) = r.apply_tables(&self.obs, &self.do_);
        LinearFunctional { obs, do_, constant: self.constant.clone() }
    }

    /// Same functional on normalized behaviors with the `(1,1)` observational and `b = 1`
    /// interventional coefficients eliminated, scaled to a canonical positive multiple.
    pub fn canonical(&self) -> Self {
        let mut g = self.clone();
        for t in g.obs.iter_mut() {
            let c = t[1][1].clone();
            if !c.is_zero() {
                g.constant += c.clone();
                t[0][0] -= c.clone();
                t[0][1] -= c.clone();
                t[1][0] -= c;
                t[1][1] = T::zero();
            }
        }
        for a in 0..2 {
            let c = g.do_[a][1].clone();
            if !c.is_zero() {
                g.constant += c.clone();
                g.do_[a][0] -= c;
                g.do_[a][1] = T::zero();
            }
        }
        let mut v = g.to_vector();
        T::normalize_direction(&mut v);
        Self::from_vector(g.l(), &v)
    }

    /// `[constant, obs…, do…]`.
    pub fn to_vector(&self) -> Vec<T> {
        let mut v = vec![self.constant.clone()];
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

    pub fn from_vector(l: usize, v: &[T]) -> Self {
        let mut f = Self::zero(l);
        f.constant = v[0].clone();
        for x in 0..l {
            for a in 0..2 {
                for b in 0..2 {
                    f.obs[x][a][b] = v[1 + 4 * x + 2 * a + b].clone();
                }
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                f.do_[a][b] = v[1 + 4 * l + 2 * a + b].clone();
            }
        }
        f
    }

    pub fn scaled(&self, s: &T) -> Self {
        let v: Vec<T> = self.to_vector().into_iter().map(|c| c * s.clone()).collect();
        Self::from_vector(self.l(), &v)
    }

    pub fn add(&self, other: &Self) -> Self {
        let v: Vec<T> = self.to_vector().into_iter().zip(other.to_vector()).map(|(a, b)| a + b).collect();
        Self::from_vector(self.l(), &v)
    }

    /// Non-zero coefficients keyed `"obs:x:a:b"` / `"do:a:b"` plus `"const"`.
    pub fn coefficient_map(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        if !self.constant.is_zero() {
            m.insert("const".to_string(), self.constant.to_f64_lossy());
        }
        for (x, t) in self.obs.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    if !t[a][b].is_zero() {
                        m.insert(format!("obs:{x}:{a}:{b}"), t[a][b].to_f64_lossy());
                    }
                }
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                if !self.do_[a][b].is_zero() {
                    m.insert(format!("do:{a}:{b}"), self.do_[a][b].to_f64_lossy());
                }
            }
        }
        m
    }

    pub fn to_f64(&self) -> LinearFunctional<f64> {
        LinearFunctional::from_vector(self.l(), &self.to_vector().iter().map(|v| v.to_f64_lossy()).collect::<Vec<_>>())
    }

    /// Positivity `p(a,b|x) ≥ 0`.
    pub fn positivity(l: usize, x: usize, a: usize, b: usize) -> Self {
        let mut f = Self::zero(l);
        f.obs[x][a][b] = T::one();
        f
    }

    /// Trivial class `p(b|do a) − p(a,b|x) ≥ 0`.
    pub fn trivial(l: usize, a: usize, b: usize, x: usize) -> Self {
        let mut f = Self::zero(l);
        f.do_[a][b] = T::one();
        f.obs[x][a][b] = -T::one();
        f
    }

    /// `p(b|do a) − p(a,b|x') + p(a,b̄|x) + p(ā,c|x) − p(ā,c|x') ≥ 0`; `c = b` is the
    /// un-relabeled I_l22 form, general `c` covers the a-conditioned b-relabelings.
    pub fn il22_general(l: usize, a: usize, b: usize, c: usize, x: usize, xp: usize) -> Result<Self, HybridError> {
        if x == xp || x >= l || xp >= l {
            return Err(HybridError::Domain(format!("I_l22 needs distinct settings below {l}, got x={x}, x'={xp}")));
        }
        let mut f = Self::zero(l);
        f.do_[a][b] += T::one();
        f.obs[xp][a][b] -= T::one();
        f.obs[x][a][1 - b] += T::one();
        f.obs[x][1 - a][c] += T::one();
        f.obs[xp][1 - a][c] -= T::one();
        Ok(f)
    }

    pub fn il22(l: usize, a: usize, b: usize, x: usize, xp: usize) -> Result<Self, HybridError> {
        Self::il22_general(l, a, b, b, x, xp)
    }

    /// Distinct relabeled copies of `self`, compared in canonical form.
    pub fn orbit(&self) -> Vec<Self> {
        let mut seen: Vec<Vec<T>> = Vec::new();
        let mut out = Vec::new();
        for r in Relabeling::all(self.l()) {
            let g = self.relabel(&r);
            let key = g.canonical().to_vector();
            if !seen.contains(&key) {
                seen.push(key);
                out.push(g);
            }
        }
        out
    }
}

/// Which instrumental inequality (`1`, `2` or `3`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Instrumental {
    I1,
    I2,
    I3,
}

impl Instrumental {
    pub fn from_index(i: u8) -> Result<Self, HybridError> {
        match i {
            1 => Ok(Instrumental::I1),
            2 => Ok(Instrumental::I2),
            3 => Ok(Instrumental::I3),
            _ => Err(HybridError::Domain(format!("instrumental inequality index must be 1, 2 or 3, got {i}"))),
        }
    }

    pub fn min_settings(self) -> usize {
        match self {
            Instrumental::I1 => 2,
            Instrumental::I2 => 3,
            Instrumental::I3 => 4,
        }
    }

    /// The inequality value `ℐ(p)` (classically `≤ 0`) as an affine functional.
    pub fn value_functional<T: Scalar>(self, l: usize) -> Result<LinearFunctional<T>, HybridError> {
        if l < self.min_settings() {
            return Err(HybridError::Domain(format!("{self:?} needs l ≥ {}, got {l}", self.min_settings())));
        }
        let mut f = LinearFunctional::zero(l);
        let terms: &[(i64, usize, usize, usize)] = match self {
            Instrumental::I1 => {
                f.constant = -T::one();
                &[(1, 0, 0, 0), (1, 1, 0, 1)]
            }
            Instrumental::I2 => &[(1, 0, 0, 1), (-1, 1, 0, 1), (-1, 1, 1, 1), (-1, 2, 1, 0), (-1, 2, 0, 1)],
            Instrumental::I3 => &[
                (1, 0, 0, 0),
                (1, 0, 1, 0),
                (-1, 1, 0, 1),
                (-1, 1, 1, 0),
                (-1, 2, 0, 0),
                (-1, 2, 1, 0),
                (-1, 3, 0, 0),
                (-1, 3, 1, 1),
            ],
        };
        for &(s, x, a, b) in terms {
            f.obs[x][a][b] += T::from_i64(s).expect("small integer");
        }
        Ok(f)
    }
}

/// Causal bound `ACE ≥ C_i`, `i ∈ {1,2,3}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AceBound {
    C1,
    C2,
    C3,
}

impl AceBound {
    pub fn from_index(i: u8) -> Result<Self, HybridError> {
        match i {
            1 => Ok(AceBound::C1),
            2 => Ok(AceBound::C2),
            3 => Ok(AceBound::C3),
            _ => Err(HybridError::Domain(format!("ACE bound index must be 1, 2 or 3, got {i}"))),
        }
    }

    pub fn min_settings(self) -> usize {
        match self {
            AceBound::C1 => 2,
            AceBound::C2 | AceBound::C3 => 3,
        }
    }

    /// `C_i` as an affine functional of the observational data.
    pub fn functional<T: Scalar>(self, l: usize) -> Result<LinearFunctional<T>, HybridError> {
        if l < self.min_settings() {
            return Err(HybridError::Domain(format!("{self:?} needs l ≥ {}, got {l}", self.min_settings())));
        }
        let mut f = LinearFunctional::zero(l);
        f.constant = -T::from_i64(2).expect("small integer");
        let terms: &[(i64, usize, usize, usize)] = match self {
            AceBound::C1 => &[(2, 0, 0, 0), (1, 0, 1, 1), (1, 1, 0, 1), (1, 1, 1, 1)],
            AceBound::C2 => &[(1, 0, 0, 0), (1, 2, 0, 0), (1, 0, 1, 0), (1, 1, 1, 1), (1, 2, 1, 1)],
            AceBound::C3 => &[
                (1, 0, 0, 0),
                (1, 1, 0, 0),
                (-1, 1, 0, 1),
                (1, 2, 0, 1),
                (1, 0, 1, 0),
                (-1, 1, 1, 0),
                (1, 1, 1, 1),
                (1, 2, 1, 1),
            ],
        };
        for &(s, x, a, b) in terms {
            f.obs[x][a][b] += T::from_i64(s).expect("small integer");
        }
        Ok(f)
    }
}
