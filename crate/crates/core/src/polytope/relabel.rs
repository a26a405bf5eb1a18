//! The relabeling group `S_l × (a-flip) × (per-a b-flips)` acting on behaviors and functionals.

use hybrid_bell_solver::Scalar;

use crate::behavior::ExtendedBehavior;
use crate::HybridError;

/// Relabeling `x ↦ π(x)`, `a ↦ a ⊕ s`, `b ↦ b ⊕ t_a` (the b-flip is chosen by the original `a`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relabeling {
    perm: Vec<usize>,
    a_flip: u8,
    b_flip: [u8; 2],
}

impl Relabeling {
    pub fn new(perm: Vec<usize>, a_flip: bool, b_flip: [bool; 2]) -> Result<Self, HybridError> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || seen[p] {
                return Err(HybridError::Domain(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        Ok(Relabeling { perm, a_flip: a_flip as u8, b_flip: [b_flip[0] as u8, b_flip[1] as u8] })
    }

    pub fn identity(l: usize) -> Self {
        Relabeling { perm: (0..l).collect(), a_flip: 0, b_flip: [0, 0] }
    }

    pub fn l(&self) -> usize {
        self.perm.len()
    }

    pub fn map_x(&self, x: usize) -> usize {
        self.perm[x]
    }

    pub fn map_a(&self, a: usize) -> usize {
        a ^ self.a_flip as usize
    }

    /// Image of outcome `b` given the original `a`.
    pub fn map_b(&self, a: usize, b: usize) -> usize {
        b ^ self.b_flip[a] as usize
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Relabeling) -> Relabeling {
        let perm = other.perm.iter().map(|&p| self.perm[p]).collect();
        let mut b_flip = [0; 2];
        for a in 0..2 {
            b_flip[a] = other.b_flip[a] ^ self.b_flip[a ^ other.a_flip as usize];
        }
        Relabeling { perm, a_flip: self.a_flip ^ other.a_flip, b_flip }
    }

    pub fn inverse(&self) -> Relabeling {
        let mut perm = vec![0; self.perm.len()];
        for (x, &p) in self.perm.iter().enumerate() {
            perm[p] = x;
        }
        let s = self.a_flip as usize;
        Relabeling { perm, a_flip: self.a_flip, b_flip: [self.b_flip[s], self.b_flip[1 ^ s]] }
    }

    /// All `l!·8` group elements, identity first.
    pub fn all(l: usize) -> Vec<Relabeling> {
        let mut out = Vec::new();
        for perm in permutations(l) {
            for s in 0..2u8 {
                for t in 0..4u8 {
                    out.push(Relabeling { perm: perm.clone(), a_flip: s, b_flip: [t & 1, t >> 1] });
                }
            }
        }
        out
    }

    /// Moves table entries: `out[π(x)][a⊕s][b⊕t_a] = obs[x][a][b]`, same for the do table.
    pub fn apply_tables<T: Clone>(&self, obs: &[[[T; 2]; 2]], do_: &[[T; 2]; 2]) -> (Vec<[[T; 2]; 2]>, [[T; 2]; 2]) {
        let mut new_obs = obs.to_vec();
        for (x, t) in obs.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    new_obs[self.map_x(x)][self.map_a(a)][self.map_b(a, b)] = t[a][b].clone();
                }
            }
        }
        let mut new_do = do_.clone();
        for a in 0..2 {
            for b in 0..2 {
                new_do[self.map_a(a)][self.map_b(a, b)] = do_[a][b].clone();
            }
        }
        (new_obs, new_do)
    }

    pub fn apply<T: Scalar>(&self, b: &ExtendedBehavior<T>) -> Result<ExtendedBehavior<T>, HybridError> {
        if b.l() != self.l() {
            return Err(HybridError::Structural(format!("relabeling for l={} applied to l={}", self.l(), b.l())));
        }
        let (obs, do_) = self.apply_tables(b.obs_table(), b.do_table());
        ExtendedBehavior::new(obs, do_)
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{from_strategy, DeterministicStrategy, Scenario};
    use crate::Behavior;

    #[test]
    fn group_order() {
        assert_eq!(Relabeling::all(2).len(), 16);
        assert_eq!(Relabeling::all(3).len(), 48);
        assert_eq!(Relabeling::all(2)[0], Relabeling::identity(2));
    }

    #[test]
    fn composition_and_inverse_act_correctly() {
        let s = Scenario::new(3).unwrap();
        let b = Behavior::mixture(&[
            (0.3, &from_strategy(&DeterministicStrategy::all(s)[5])),
            (0.7, &from_strategy(&DeterministicStrategy::all(s)[22])),
        ])
        .unwrap();
        let all = Relabeling::all(3);
        for r in all.iter().step_by(5) {
            for q in all.iter().step_by(7) {
                let lhs = r.compose(q).apply(&b).unwrap();
                let rhs = r.apply(&q.apply(&b).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
            assert_eq!(r.inverse().apply(&r.apply(&b).unwrap()).unwrap(), b);
        }
    }

    #[test]
    fn vertices_map_to_vertices() {
        let s = Scenario::new(2).unwrap();
        let verts: Vec<Behavior> = DeterministicStrategy::all(s).iter().map(from_strategy).collect();
        for r in Relabeling::all(2) {
            for v in &verts {
                assert!(verts.contains(&r.apply(v).unwrap()));
            }
        }
    }
}
