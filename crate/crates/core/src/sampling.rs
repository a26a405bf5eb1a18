//! Seeded generators for behaviors, quantum models and assemblages.
//!
//! Everything takes an explicit `Rng` so callers control reproducibility; [`rng`] gives the
//! generator used throughout the crate.

use hybrid_bell_solver::linalg::{c, identity, projector, CMatrix};
use hybrid_bell_solver::Herm2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::behavior::{DeterministicStrategy, Scenario};
use crate::quantum::{random_unit_vector, QuantumInstrumentalModel};
use crate::steering::{assemblage_from_model, Channel, ExtendedAssemblage};
use crate::{Behavior, HybridError};

pub fn rng(seed: u64) -> ChaCha8Rng {
    <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed)
}

/// Uniform point of the `n`-simplex (flat Dirichlet).
pub fn simplex_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// A valid behavior with each `p(·,·|x)` and `p(·|do a)` drawn uniformly; usually outside
/// the classical polytope and often violating the trivial class.
pub fn random_behavior<R: Rng + ?Sized>(l: usize, rng: &mut R) -> Result<Behavior, HybridError> {
    let obs = (0..l)
        .map(|_| {
            let p = simplex_point(4, rng);
            [[p[0], p[1]], [p[2], p[3]]]
        })
        .collect();
    let mut do_ = [[0.0; 2]; 2];
    for row in &mut do_ {
        let q: f64 = rng.gen();
        *row = [q, 1.0 - q];
    }
    Behavior::new(obs, do_)
}

/// Convex mixture of `k` strategies drawn uniformly, with flat Dirichlet weights.
pub fn random_classical_behavior<R: Rng + ?Sized>(l: usize, k: usize, rng: &mut R) -> Result<Behavior, HybridError> {
    let all = DeterministicStrategy::all(Scenario::new(l)?);
    let w = simplex_point(k.max(1), rng);
    let parts: Vec<(f64, Behavior)> =
        w.into_iter().map(|wi| (wi, all[rng.gen_range(0..all.len())].behavior::<f64>())).collect();
    let refs: Vec<(f64, &Behavior)> = parts.iter().map(|(w, b)| (*w, b)).collect();
    Behavior::mixture(&refs)
}

fn random_sharp_povm<R: Rng + ?Sized>(rng: &mut R) -> [CMatrix; 2] {
    let p = projector(&random_unit_vector(2, rng));
    [p.clone(), identity(2) - p]
}

/// Random two-qubit model: Haar-random pure state, projective qubit measurements.
pub fn random_quantum_model<R: Rng + ?Sized>(l: usize, rng: &mut R) -> Result<QuantumInstrumentalModel, HybridError> {
    let psi = random_unit_vector(4, rng);
    let alice: Vec<[CMatrix; 2]> = (0..l).map(|_| random_sharp_povm(rng)).collect();
    let bob = [random_sharp_povm(rng), random_sharp_povm(rng)];
    QuantumInstrumentalModel::new(projector(&psi), 2, 2, alice, bob)
}

pub fn random_quantum_behavior<R: Rng + ?Sized>(l: usize, rng: &mut R) -> Result<Behavior, HybridError> {
    crate::quantum::born_behavior(&random_quantum_model(l, rng)?)
}

/// Mixture of a quantum and a classical behavior; always satisfies the trivial class.
pub fn random_trivial_class_behavior<R: Rng + ?Sized>(l: usize, rng: &mut R) -> Result<Behavior, HybridError> {
    let q = random_quantum_behavior(l, rng)?;
    let k = rng.gen_range(1..=4);
    let cl = random_classical_behavior(l, k, rng)?;
    let w: f64 = rng.gen();
    Behavior::mixture(&[(w, &q), (1.0 - w, &cl)])
}

/// Density matrix from a 2x2 complex Ginibre matrix (Hilbert–Schmidt measure).
pub fn random_qubit_state<R: Rng + ?Sized>(rng: &mut R) -> Herm2 {
    let mut g = || c(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let m = CMatrix::from_fn(2, 2, |_, _| g());
    let rho = &m * m.adjoint();
    let tr = rho.trace().re;
    hybrid_bell_solver::linalg::matrix_to_herm2(&(rho / c(tr, 0.0)))
}

/// Classical extended assemblage: random weights over all `2^l` responses and random hidden
/// states `ρ_{a,λ}`.
pub fn random_classical_assemblage<R: Rng + ?Sized>(l: usize, rng: &mut R) -> Result<ExtendedAssemblage, HybridError> {
    let n = 1 << l;
    let weights = simplex_point(n, rng);
    let states: Vec<[Herm2; 2]> = (0..n).map(|_| [random_qubit_state(rng), random_qubit_state(rng)]).collect();
    ExtendedAssemblage::classical(l, &weights, &states)
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
fn random_unitary<R: Rng + ?Sized>(rng: &mut R) -> CMatrix {
    let mut g = || c(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let m = CMatrix::from_fn(2, 2, |_, _| g());
    let qr = m.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CMatrix::from_fn(2, 2, |i, j| if i == j { r[(i, i)] / c(r[(i, i)].norm(), 0.0) } else { c(0.0, 0.0) });
    q * phases
}

fn random_two_qubit_state<R: Rng + ?Sized>(rng: &mut R) -> CMatrix {
    let mut g = || c(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let m = CMatrix::from_fn(4, 4, |_, _| g());
    let rho = &m * m.adjoint();
    let tr = rho.trace().re;
    rho / c(tr, 0.0)
}

/// Quantum extended assemblage: a random mixed two-qubit state (rank up to 4), random
/// projective measurements for Alice and random unitary channels `E_a` on Bob's qubit.
pub fn random_quantum_assemblage<R: Rng + ?Sized>(l: usize, rng: &mut R) -> Result<ExtendedAssemblage, HybridError> {
    let rho = random_two_qubit_state(rng);
    let alice: Vec<[CMatrix; 2]> = (0..l).map(|_| random_sharp_povm(rng)).collect();
    let channels = [Channel::unitary(random_unitary(rng)), Channel::unitary(random_unitary(rng))];
    assemblage_from_model(&rho, &alice, &channels)
}

/// As [`random_quantum_assemblage`] with identity channels, so `Σ_a σ_{a|x}` does not depend
/// on `x` and the standard steering test applies.
pub fn random_no_signaling_assemblage<R: Rng + ?Sized>(l: usize, rng: &mut R) -> Result<ExtendedAssemblage, HybridError> {
    let rho = random_two_qubit_state(rng);
    let alice: Vec<[CMatrix; 2]> = (0..l).map(|_| random_sharp_povm(rng)).collect();
    assemblage_from_model(&rho, &alice, &[Channel::identity(), Channel::identity()])
}
