//! Quantum models of the instrumental scenario and their hybrid behaviors.

pub mod efficiency;
pub mod seesaw;

use std::f64::consts::FRAC_1_SQRT_2;

use hybrid_bell_solver::linalg::{c, hermitian_defect, hermitian_eigen, identity, kron, projector, CMatrix, CVector};
use rand::Rng;

pub use efficiency::{
    efficiency_boundary, efficiency_sweep, efficiency_threshold, efficiency_value, noisy_behavior, noisy_functional, Binning,
    EfficiencyMode, EfficiencyPoint, SweepPoint, ThresholdOptions, ThresholdResult,
};
pub use seesaw::{ace_bound_gap, seesaw_from_starts, seesaw_optimize, AceGap, SeesawOptions, SeesawResult};

use crate::behavior::ExtendedBehavior;
use crate::{Behavior, HybridError};

/// Hermitian matrix; hermiticity is checked where models are validated.
pub type HermitianOperator = CMatrix;

const HERMITIAN_TOL: f64 = 1e-12;
const POVM_TOL: f64 = 1e-10;

/// Shared state `ρ` on `A⊗B`, Alice's two-outcome POVMs per setting and Bob's per `a`.
#[derive(Clone, Debug)]
pub struct QuantumInstrumentalModel {
    pub rho: HermitianOperator,
    pub dim_a: usize,
    pub dim_b: usize,
    /// `alice[x][a] = M_x^(a)`.
    pub alice: Vec<[HermitianOperator; 2]>,
    /// `bob[a][b] = N_a^(b)`.
    pub bob: [[HermitianOperator; 2]; 2],
}

impl QuantumInstrumentalModel {
    pub fn new(
        rho: HermitianOperator,
        dim_a: usize,
        dim_b: usize,
        alice: Vec<[HermitianOperator; 2]>,
        bob: [[HermitianOperator; 2]; 2],
    ) -> Result<Self, HybridError> {
        let m = QuantumInstrumentalModel { rho, dim_a, dim_b, alice, bob };
        m.validate()?;
        Ok(m)
    }

    /// Model from a pure state and rank-one projectors: `M_x^(0) = |α_x⟩⟨α_x|`, `N_a^(0) = |β_a⟩⟨β_a|`.
    pub fn from_projectors(psi: &CVector, alice0: &[CVector], bob0: [&CVector; 2]) -> Result<Self, HybridError> {
        let da = alice0.first().map_or(2, |v| v.len());
        let db = bob0[0].len();
        let unit = |v: &CVector| v / c(v.norm(), 0.0);
        let two_outcome = |v: &CVector, d: usize| {
            let p = projector(&unit(v));
            [p.clone(), identity(d) - p]
        };
        let alice = alice0.iter().map(|v| two_outcome(v, da)).collect();
        let bob = [two_outcome(bob0[0], db), two_outcome(bob0[1], db)];
        Self::new(projector(&unit(psi)), da, db, alice, bob)
    }

    pub fn l(&self) -> usize {
        self.alice.len()
    }

    pub fn validate(&self) -> Result<(), HybridError> {
        let (da, db) = (self.dim_a, self.dim_b);
        let err = |m: String| Err(HybridError::Model(m));
        if self.alice.len() < 2 {
            return err(format!("need at least two settings, got {}", self.alice.len()));
        }
        if self.rho.shape() != (da * db, da * db) {
            return err(format!("state has shape {:?}, expected {}x{}", self.rho.shape(), da * db, da * db));
        }
        check_hermitian_psd(&self.rho, "state")?;
        let tr = self.rho.trace();
        if (tr.re - 1.0).abs() > POVM_TOL || tr.im.abs() > POVM_TOL {
            return err(format!("state has trace {tr}"));
        }
        for (x, povm) in self.alice.iter().enumerate() {
            check_povm(povm, da, &format!("Alice setting {x}"))?;
        }
        for (a, povm) in self.bob.iter().enumerate() {
            check_povm(povm, db, &format!("Bob input {a}"))?;
        }
        Ok(())
    }

    /// Reduced state of Bob.
    pub fn rho_b(&self) -> CMatrix {
        hybrid_bell_solver::linalg::partial_trace_first(&self.rho, self.dim_a, self.dim_b)
    }

    /// Born-rule behavior without re-validating.
    pub(crate) fn behavior_unchecked(&self) -> Behavior {
        let ia = identity(self.dim_a);
        let expect = |op: &CMatrix| hybrid_bell_solver::linalg::trace_product(op, &self.rho).re;
        let obs = self
            .alice
            .iter()
            .map(|m| {
                let mut t = [[0.0; 2]; 2];
                for a in 0..2 {
                    for b in 0..2 {
                        t[a][b] = expect(&kron(&m[a], &self.bob[a][b]));
                    }
                }
                t
            })
            .collect();
        let mut do_ = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                do_[a][b] = expect(&kron(&ia, &self.bob[a][b]));
            }
        }
        ExtendedBehavior::new(obs, do_).expect("shapes are consistent")
    }
}

fn check_hermitian_psd(m: &CMatrix, what: &str) -> Result<(), HybridError> {
    let defect = hermitian_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(HybridError::Model(format!("{what} is not Hermitian (defect {defect:.3e})")));
    }
    let min = hermitian_eigen(m).0[0];
    if min < -POVM_TOL {
        return Err(HybridError::Model(format!("{what} has negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

fn check_povm(povm: &[CMatrix; 2], d: usize, what: &str) -> Result<(), HybridError> {
    for (k, e) in povm.iter().enumerate() {
        if e.shape() != (d, d) {
            return Err(HybridError::Model(format!("{what} element {k} has shape {:?}, expected {d}x{d}", e.shape())));
        }
        check_hermitian_psd(e, &format!("{what} element {k}"))?;
    }
    let defect = (&povm[0] + &povm[1] - identity(d)).iter().fold(0.0, |m: f64, z| m.max(z.norm()));
    if defect > POVM_TOL {
        return Err(HybridError::Model(format!("{what} is incomplete (defect {defect:.3e})")));
    }
    Ok(())
}

/// `obs[x][a][b] = tr[(M_x^(a)⊗N_a^(b))ρ]`, `do[a][b] = tr[(𝟙⊗N_a^(b))ρ]`.
pub fn born_behavior(m: &QuantumInstrumentalModel) -> Result<Behavior, HybridError> {
    m.validate()?;
    Ok(m.behavior_unchecked())
}

/// Quantum average causal effect `max_{a,a',b} tr[(𝟙⊗(N_a^(b) − N_a'^(b)))ρ]`.
pub fn qace(m: &QuantumInstrumentalModel) -> f64 {
    let rb = m.rho_b();
    let mut best = 0.0f64;
    for b in 0..2 {
        let d = hybrid_bell_solver::linalg::trace_product(&(&m.bob[0][b] - &m.bob[1][b]), &rb).re;
        best = best.max(d.abs());
    }
    best
}

/// Maximally entangled strategy reaching `−(√2−1)/2` on the I_222 orbit: `|Φ⁺⟩`, Alice projects
/// on equatorial states with phases `π/4` and `3π/4`, Bob on `(|0⟩ − i|1⟩)/√2` after `a = 0` and
/// `(|0⟩ − |1⟩)/√2` after `a = 1`.
pub fn max_violation_model() -> QuantumInstrumentalModel {
    let h = FRAC_1_SQRT_2;
    let psi = CVector::from_vec(vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);
    let equatorial = |phase: f64| CVector::from_vec(vec![c(h, 0.0), c(h * phase.cos(), h * phase.sin())]);
    let alice = [equatorial(std::f64::consts::FRAC_PI_4), equatorial(3.0 * std::f64::consts::FRAC_PI_4)];
    let bob0 = CVector::from_vec(vec![c(h, 0.0), c(0.0, -h)]);
    let bob1 = CVector::from_vec(vec![c(h, 0.0), c(-h, 0.0)]);
    QuantumInstrumentalModel::from_projectors(&psi, &alice, [&bob0, &bob1]).expect("valid by construction")
}

/// Haar-random unit vector in `C^d`.
pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    use rand_distr::StandardNormal;
    let v = CVector::from_fn(d, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let n = v.norm();
    v / c(n, 0.0)
}

/// `cos θ|00⟩ + sin θ|11⟩`.
pub fn partially_entangled_state(theta: f64) -> CVector {
    CVector::from_vec(vec![c(theta.cos(), 0.0), c(0.0, 0.0), c(0.0, 0.0), c(theta.sin(), 0.0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{eval_trivial, il22_min};

    #[test]
    fn product_state_computational_basis() {
        let zero = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let psi = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let m = QuantumInstrumentalModel::from_projectors(&psi, &[zero.clone(), zero.clone()], [&zero, &zero]).unwrap();
        let p = born_behavior(&m).unwrap();
        assert!(p.is_valid());
        assert!((p.obs(0, 0, 0) - 1.0).abs() < 1e-15 && (p.obs(1, 0, 0) - 1.0).abs() < 1e-15);
        assert_eq!(qace(&m), 0.0);
    }

    #[test]
    fn orthogonal_bob_projectors() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let zero = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let one = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let alice = [random_unit_vector(2, &mut rng), random_unit_vector(2, &mut rng)];
        // Bob's qubit in |0⟩: N_a^(b) = |b⊕a⟩⟨b⊕a| moves all weight between outcomes.
        let m = QuantumInstrumentalModel::from_projectors(&partially_entangled_state(0.0), &alice, [&zero, &one]).unwrap();
        assert!((qace(&m) - 1.0).abs() < 1e-12);
        assert!((born_behavior(&m).unwrap().ace() - 1.0).abs() < 1e-12);
        // Maximally mixed on Bob's side: the same measurements carry no effect.
        let psi = partially_entangled_state(std::f64::consts::FRAC_PI_4);
        let m = QuantumInstrumentalModel::from_projectors(&psi, &alice, [&zero, &one]).unwrap();
        assert!(qace(&m).abs() < 1e-12);
    }

    #[test]
    fn max_violation_value() {
        let p = born_behavior(&max_violation_model()).unwrap();
        let target = -(2f64.sqrt() - 1.0) / 2.0;
        assert!((il22_min(&p).0 - target).abs() < 1e-12);
        for x in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    assert!(eval_trivial(&p, a, b, x) >= -1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_invalid_models() {
        let mut m = max_violation_model();
        m.rho *= c(1.1, 0.0);
        assert!(matches!(born_behavior(&m), Err(HybridError::Model(_))));
        let mut m = max_violation_model();
        m.bob[0][1] = identity(2);
        assert!(matches!(born_behavior(&m), Err(HybridError::Model(_))));
        let mut m = max_violation_model();
        m.rho[(0, 0)] = c(-0.5, 0.0);
        m.rho[(3, 3)] = c(1.5, 0.0);
        assert!(matches!(born_behavior(&m), Err(HybridError::Model(_))));
    }
}
