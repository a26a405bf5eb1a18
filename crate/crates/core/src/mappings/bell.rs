//! Bell behaviors `p(a,b|x,y)` with `|Y| = |A| = 2`, and the bijection with instrumental data
//! satisfying the trivial class: Bob's input `y` plays the role of the `a` his device receives.

use crate::behavior::ExtendedBehavior;
use crate::{Behavior, HybridError};

const BIJECTION_TOL: f64 = 1e-9;

/// `p[x][y][a][b]`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BellBehavior {
    p: Vec<[[[f64; 2]; 2]; 2]>,
}

impl BellBehavior {
    pub fn new(p: Vec<[[[f64; 2]; 2]; 2]>) -> Result<Self, HybridError> {
        if p.is_empty() {
            return Err(HybridError::Structural("Bell behavior needs at least one setting x".into()));
        }
        let b = BellBehavior { p };
        for x in 0..b.num_x() {
            for y in 0..2 {
                let mut total = 0.0;
                for a in 0..2 {
                    for bb in 0..2 {
                        let v = b.p[x][y][a][bb];
                        if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                            return Err(HybridError::Domain(format!("p({a},{bb}|{x},{y}) = {v} outside [0,1]")));
                        }
                        total += v;
                    }
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(HybridError::Domain(format!("p(·,·|{x},{y}) sums to {total}")));
                }
            }
        }
        Ok(b)
    }

    /// `p(a,b|x,y) = Σ_λ w_λ [a = f_λ(x)][b = g_λ(y)]` for deterministic local responses.
    pub fn local_deterministic(f: &[u8], g: [u8; 2]) -> Self {
        let p = f
            .iter()
            .map(|&fx| {
                let mut t = [[[0.0; 2]; 2]; 2];
                for (y, &gy) in g.iter().enumerate() {
                    t[y][fx as usize][gy as usize] = 1.0;
                }
                t
            })
            .collect();
        BellBehavior { p }
    }

    /// Mixture `Σ w_k p_k` of behaviors with the same number of settings.
    pub fn mixture(parts: &[(f64, &BellBehavior)]) -> Result<Self, HybridError> {
        let n = parts.first().ok_or_else(|| HybridError::Structural("empty mixture".into()))?.1.num_x();
        let mut p = vec![[[[0.0; 2]; 2]; 2]; n];
        for (w, b) in parts {
            if b.num_x() != n {
                return Err(HybridError::Structural("mixture of behaviors with different settings".into()));
            }
            for x in 0..n {
                for y in 0..2 {
                    for a in 0..2 {
                        for bb in 0..2 {
                            p[x][y][a][bb] += w * b.p[x][y][a][bb];
                        }
                    }
                }
            }
        }
        BellBehavior::new(p)
    }

    pub fn num_x(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.p[x][y][a][b]
    }

    pub fn table(&self) -> &[[[[f64; 2]; 2]; 2]] {
        &self.p
    }

    /// `⟨A_x B_y⟩` with outcome 0 ↦ +1.
    pub fn correlator(&self, x: usize, y: usize) -> f64 {
        let t = &self.p[x][y];
        t[0][0] + t[1][1] - t[0][1] - t[1][0]
    }

    /// Largest change of a one-party marginal under the other party's setting.
    pub fn signaling(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..self.num_x() {
            for a in 0..2 {
                let m = |y: usize| self.p[x][y][a][0] + self.p[x][y][a][1];
                worst = worst.max((m(0) - m(1)).abs());
            }
        }
        for y in 0..2 {
            for b in 0..2 {
                let m = |x: usize| self.p[x][y][0][b] + self.p[x][y][1][b];
                for x in 1..self.num_x() {
                    worst = worst.max((m(x) - m(0)).abs());
                }
            }
        }
        worst
    }

    pub fn is_non_signaling(&self, tol: f64) -> bool {
        self.signaling() <= tol
    }
}

/// `p(a,b|x,y=a) = obs[x][a][b]`, `p(ā,b|x,y=a) = do[a][b] − obs[x][a][b]`.
pub fn instrumental_to_bell(b: &Behavior) -> Result<BellBehavior, HybridError> {
    let mut p = vec![[[[0.0; 2]; 2]; 2]; b.l()];
    for (x, t) in p.iter_mut().enumerate() {
        for y in 0..2 {
            for bb in 0..2 {
                let other = b.do_(y, bb) - b.obs(x, y, bb);
                if other < -BIJECTION_TOL {
                    return Err(HybridError::Domain(format!(
                        "trivial inequality p({bb}|do {y}) ≥ p({y},{bb}|{x}) violated by {:.3e}; no Bell image",
                        -other
                    )));
                }
                t[y][y][bb] = *b.obs(x, y, bb);
                t[y][1 - y][bb] = other;
            }
        }
    }
    Ok(BellBehavior { p })
}

/// `obs[x][a][b] = p(a,b|x,y=a)`, `do[a][b] = Σ_a' p(a',b|x,y=a)`; the latter must not depend on `x`.
pub fn bell_to_instrumental(p: &BellBehavior) -> Result<Behavior, HybridError> {
    let l = p.num_x();
    let obs = (0..l)
        .map(|x| {
            let mut t = [[0.0; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    t[a][b] = p.p(a, b, x, a);
                }
            }
            t
        })
        .collect();
    let do_at = |x: usize| {
        let mut d = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                d[a][b] = p.p(0, b, x, a) + p.p(1, b, x, a);
            }
        }
        d
    };
    let do_ = do_at(0);
    for x in 1..l {
        let d = do_at(x);
        for a in 0..2 {
            for b in 0..2 {
                if (d[a][b] - do_[a][b]).abs() > BIJECTION_TOL {
                    return Err(HybridError::Domain(format!(
                        "Bob's marginal p({b}|y={a}) differs between x=0 and x={x} by {:.3e} (signaling)",
                        (d[a][b] - do_[a][b]).abs()
                    )));
                }
            }
        }
    }
    ExtendedBehavior::new(obs, do_)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{from_strategy, DeterministicStrategy, Scenario};

    #[test]
    fn uniform_maps_to_uniform() {
        let q = instrumental_to_bell(&Behavior::uniform(2).unwrap()).unwrap();
        assert!(q.table().iter().flatten().flatten().flatten().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn strategies_map_to_local_deterministic_points() {
        for s in DeterministicStrategy::all(Scenario::new(2).unwrap()) {
            let b: Behavior = from_strategy(&s);
            let q = instrumental_to_bell(&b).unwrap();
            assert_eq!(q, BellBehavior::local_deterministic(&s.f, s.g));
            assert_eq!(bell_to_instrumental(&q).unwrap(), b);
        }
    }

    #[test]
    fn product_behavior() {
        // p(a|x) p(b|y)
        let pa = [0.3, 0.8];
        let pb = [0.6, 0.1];
        let mut p = vec![[[[0.0; 2]; 2]; 2]; 2];
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let fa = if a == 0 { pa[x] } else { 1.0 - pa[x] };
                        let fb = if b == 0 { pb[y] } else { 1.0 - pb[y] };
                        p[x][y][a][b] = fa * fb;
                    }
                }
            }
        }
        let q = BellBehavior::new(p).unwrap();
        let b = bell_to_instrumental(&q).unwrap();
        for a in 0..2 {
            assert!((b.do_(a, 0) - pb[a]).abs() < 1e-15);
        }
        assert!(b.is_valid());
    }

    #[test]
    fn rejects_trivial_class_violation_and_signaling() {
        let b = Behavior::from_nested(
            vec![vec![vec![0.7, 0.0], vec![0.3, 0.0]], vec![vec![0.5, 0.0], vec![0.5, 0.0]]],
            vec![vec![0.5, 0.5], vec![1.0, 0.0]],
        )
        .unwrap();
        assert!(matches!(instrumental_to_bell(&b), Err(HybridError::Domain(_))));
        let mut p = vec![[[[0.25; 2]; 2]; 2]; 2];
        p[1][0] = [[0.5, 0.0], [0.5, 0.0]];
        let q = BellBehavior::new(p).unwrap();
        assert!(bell_to_instrumental(&q).is_err());
    }
}
