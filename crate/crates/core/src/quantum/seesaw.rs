//! Alternating minimization of a linear functional over qubit-qubit models.
//!
//! With two of {state, Alice's projectors, Bob's projectors} fixed, the objective is linear in
//! the third and its minimum is an eigenvector or a negative-eigenspace projector, so every step
//! is non-increasing.

use hybrid_bell_solver::linalg::{
    c, hermitian_eigen, identity, kron, negative_projector, partial_trace_first, partial_trace_second, projector, CMatrix,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{random_unit_vector, QuantumInstrumentalModel};
use crate::polytope::{AceBound, LinearFunctional};
use crate::HybridError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Stop once a full sweep improves the objective by less than this.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        SeesawOptions { restarts: 20, max_iterations: 500, tolerance: 1e-10, seed: 0 }
    }
}

impl SeesawOptions {
    pub fn with_seed(seed: u64) -> Self {
        SeesawOptions { seed, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct SeesawResult {
    /// Best objective value over all restarts.
    pub value: f64,
    pub model: QuantumInstrumentalModel,
    /// Whether the best restart met the tolerance before the iteration cap.
    pub converged: bool,
    /// Objective after each sweep of the best restart.
    pub history: Vec<f64>,
    /// Final value of every restart, in seed order.
    pub restart_values: Vec<f64>,
}

struct Run {
    value: f64,
    model: QuantumInstrumentalModel,
    converged: bool,
    history: Vec<f64>,
}

fn random_start(l: usize, seed: u64) -> QuantumInstrumentalModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let i2 = identity(2);
    let random_povm = |rng: &mut ChaCha8Rng| {
        let p = projector(&random_unit_vector(2, rng));
        [p.clone(), &i2 - p]
    };
    let alice: Vec<[CMatrix; 2]> = (0..l).map(|_| random_povm(&mut rng)).collect();
    let bob = [random_povm(&mut rng), random_povm(&mut rng)];
    QuantumInstrumentalModel { rho: identity(4) * c(0.25, 0.0), dim_a: 2, dim_b: 2, alice, bob }
}

/// Seesaw from the measurements of `model`; its state is ignored.
fn run_from(objective: &LinearFunctional<f64>, opts: &SeesawOptions, mut model: QuantumInstrumentalModel) -> Run {

    let mut history = Vec::new();
    let mut prev = f64::INFINITY;
    let mut converged = false;
    for _ in 0..opts.max_iterations {
        state_step(&mut model, objective);
        alice_step(&mut model, objective);
        bob_step(&mut model, objective);
        let value = objective.eval(&model.behavior_unchecked());
        history.push(value);
        if prev - value < opts.tolerance {
            converged = true;
            break;
        }
        prev = value;
    }
    let value = *history.last().expect("at least one sweep");
    Run { value, model, converged, history }
}

/// `G = Σ c_obs M⊗N + Σ c_do 𝟙⊗N`, so that the objective is `constant + tr[Gρ]`.
fn objective_operator(m: &QuantumInstrumentalModel, f: &LinearFunctional<f64>) -> CMatrix {
    let mut g = CMatrix::zeros(4, 4);
    let i2 = identity(2);
    for a in 0..2 {
        for b in 0..2 {
            let mut left = &i2 * c(f.do_[a][b], 0.0);
            for (x, mx) in m.alice.iter().enumerate() {
                left += &mx[a] * c(f.obs[x][a][b], 0.0);
            }
            g += kron(&left, &m.bob[a][b]);
        }
    }
    g
}

fn state_step(m: &mut QuantumInstrumentalModel, f: &LinearFunctional<f64>) {
    let (_, vecs) = hermitian_eigen(&objective_operator(m, f));
    m.rho = projector(&vecs[0]);
}

fn alice_step(m: &mut QuantumInstrumentalModel, f: &LinearFunctional<f64>) {
    let i2 = identity(2);
    for x in 0..m.alice.len() {
        // K^a = tr_B[(𝟙⊗Σ_b c N_a^b)ρ]; minimize tr[M^0 (K^0 − K^1)].
        let mut diff = CMatrix::zeros(2, 2);
        for a in 0..2 {
            let mut op = CMatrix::zeros(2, 2);
            for b in 0..2 {
                op += &m.bob[a][b] * c(f.obs[x][a][b], 0.0);
            }
            let k = partial_trace_second(&(kron(&i2, &op) * &m.rho), 2, 2);
            if a == 0 {
                diff += k;
            } else {
                diff -= k;
            }
        }
        let p = negative_projector(&diff);
        m.alice[x] = [p.clone(), &i2 - p];
    }
}

fn bob_step(m: &mut QuantumInstrumentalModel, f: &LinearFunctional<f64>) {
    let i2 = identity(2);
    let rho_b = partial_trace_first(&m.rho, 2, 2);
    for a in 0..2 {
        let mut diff = CMatrix::zeros(2, 2);
        for b in 0..2 {
            let mut op = CMatrix::zeros(2, 2);
            for (x, mx) in m.alice.iter().enumerate() {
                op += &mx[a] * c(f.obs[x][a][b], 0.0);
            }
            let l = partial_trace_first(&(kron(&op, &i2) * &m.rho), 2, 2) + &rho_b * c(f.do_[a][b], 0.0);
            if b == 0 {
                diff += l;
            } else {
                diff -= l;
            }
        }
        let p = negative_projector(&diff);
        m.bob[a] = [p.clone(), &i2 - p];
    }
}

/// Minimizes `objective(born_behavior(m))` over qubit-qubit models with projective
/// measurements, from `restarts` seeded random starts.
///
/// The result upper-bounds the quantum minimum. Restart `k` uses seed `seed + k`, so the result
/// does not depend on thread scheduling.
pub fn seesaw_optimize(objective: &LinearFunctional<f64>, opts: &SeesawOptions) -> Result<SeesawResult, HybridError> {
    if opts.restarts == 0 {
        return Err(HybridError::Domain("seesaw needs at least one restart".into()));
    }
    seesaw_from_starts(objective, &[], opts)
}

/// [`seesaw_optimize`] with extra starting points (for example optima of a nearby objective);
/// their runs follow the random restarts in `restart_values`.
pub fn seesaw_from_starts(
    objective: &LinearFunctional<f64>,
    starts: &[QuantumInstrumentalModel],
    opts: &SeesawOptions,
) -> Result<SeesawResult, HybridError> {
    if objective.l() < 2 {
        return Err(HybridError::Domain("objective needs at least two settings".into()));
    }
    if opts.restarts + starts.len() == 0 || opts.max_iterations == 0 {
        return Err(HybridError::Domain("seesaw needs at least one start and one iteration".into()));
    }
    if let Some(m) = starts.iter().find(|m| m.l() != objective.l() || m.dim_a != 2 || m.dim_b != 2) {
        return Err(HybridError::Domain(format!("start model with l={}, dims {}x{} does not fit", m.l(), m.dim_a, m.dim_b)));
    }
    let l = objective.l();
    let inits: Vec<QuantumInstrumentalModel> = (0..opts.restarts)
        .map(|k| random_start(l, opts.seed.wrapping_add(k as u64)))
        .chain(starts.iter().cloned())
        .collect();
    let runs: Vec<Run> = inits.into_par_iter().map(|m| run_from(objective, opts, m)).collect();
    let restart_values = runs.iter().map(|r| r.value).collect();
    let best = runs
        .into_iter()
        .reduce(|best, r| if r.value < best.value { r } else { best })
        .expect("restarts > 0");
    Ok(SeesawResult { value: best.value, model: best.model, converged: best.converged, history: best.history, restart_values })
}

/// Quantum model whose average causal effect falls below the classical bound `C₁`.
#[derive(Clone, Debug)]
pub struct AceGap {
    /// `qace − C₁` of the returned model (negative means the classical bound is violated).
    pub gap: f64,
    pub qace: f64,
    pub c1: f64,
    /// Weight `μ` of the linear objective that produced the model.
    pub mu: f64,
    /// `max_μ min_model [μ(p(0|do 0) − p(0|do 1)) − C₁]` over the scanned `μ`. Since
    /// `|d| ≥ μd` for `|μ| ≤ 1`, this lower-bounds the gap of every model the seesaw can reach.
    pub dual_bound: f64,
    pub model: QuantumInstrumentalModel,
}

/// Searches for `qace < C₁` at `l = 2`.
///
/// `qace − C₁ = |d| − C₁` with `d = p(0|do 0) − p(0|do 1)` is not linear, so the seesaw minimizes
/// `μd − C₁` for `μ` on a grid over `[−1, 1]` (step `1/steps`) and keeps the model with the
/// smallest true gap.
pub fn ace_bound_gap(steps: usize, opts: &SeesawOptions) -> Result<AceGap, HybridError> {
    if steps == 0 {
        return Err(HybridError::Domain("μ grid needs at least one step".into()));
    }
    let c1 = AceBound::C1.functional::<f64>(2)?;
    let mut best: Option<AceGap> = None;
    let mut dual_bound = f64::NEG_INFINITY;
    for k in 0..=2 * steps {
        let mu = -1.0 + k as f64 / steps as f64;
        let mut f = c1.scaled(&-1.0);
        f.do_[0][0] += mu;
        f.do_[1][0] -= mu;
        let r = seesaw_optimize(&f, opts)?;
        dual_bound = dual_bound.max(r.value);
        let p = r.model.behavior_unchecked();
        let q = super::qace(&r.model);
        let cv = c1.eval(&p);
        if best.as_ref().is_none_or(|b| q - cv < b.gap) {
            best = Some(AceGap { gap: q - cv, qace: q, c1: cv, mu, dual_bound: 0.0, model: r.model });
        }
    }
    let mut best = best.expect("grid is non-empty");
    best.dual_bound = dual_bound;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::Instrumental;

    #[test]
    fn reaches_quantum_bound_on_il22() {
        let f = LinearFunctional::il22(2, 0, 0, 0, 1).unwrap();
        let r = seesaw_optimize(&f, &SeesawOptions::with_seed(7)).unwrap();
        assert!(r.value <= -0.2070, "{}", r.value);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!((f.eval(&super::super::born_behavior(&r.model).unwrap()) - r.value).abs() < 1e-12);
    }

    #[test]
    fn trivial_class_has_no_quantum_violation() {
        let f = LinearFunctional::trivial(2, 1, 0, 1);
        let r = seesaw_optimize(&f, &SeesawOptions::with_seed(3)).unwrap();
        assert!(r.value >= -1e-9);
    }

    #[test]
    fn first_instrumental_inequality_not_violated_at_two_settings() {
        let f = Instrumental::I1.value_functional::<f64>(2).unwrap().scaled(&-1.0);
        let r = seesaw_optimize(&f, &SeesawOptions::with_seed(5)).unwrap();
        assert!(-r.value <= 1e-9, "max ℐ₁ = {}", -r.value);
    }

    #[test]
    fn quantum_ace_below_c1() {
        let g = ace_bound_gap(20, &SeesawOptions { restarts: 8, ..SeesawOptions::with_seed(2) }).unwrap();
        assert!(g.gap < -0.1, "{g:?}");
        assert!(g.gap >= g.dual_bound - 1e-9);
    }

    #[test]
    fn deterministic_given_seed() {
        let f = LinearFunctional::il22(2, 1, 0, 1, 0).unwrap();
        let opts = SeesawOptions { restarts: 4, ..SeesawOptions::with_seed(11) };
        let a = seesaw_optimize(&f, &opts).unwrap();
        let b = seesaw_optimize(&f, &opts).unwrap();
        assert_eq!(a.restart_values, b.restart_values);
    }
}
