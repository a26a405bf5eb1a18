//! Extended assemblages and their classical-compatibility SDPs.
//!
//! A bipartite extended assemblage collects Bob's conditional states `σ_{a|x}` together with
//! the states `σ_{do(a)}` prepared when Alice's output is set by an intervention. It is
//! classical if some deterministic response `λ` and hidden states `ρ_{a,λ}` (trace independent
//! of `a`) reproduce both parts. The robustness `τ` is the least trace of classical noise
//! whose admixture makes the data classical.

mod program;
mod scenarios;

use hybrid_bell_solver::linalg::{kron, matrix_to_herm2, partial_trace_first, CMatrix};
use hybrid_bell_solver::{Herm2, SdpOptions, SdpResiduals};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::HybridError;

pub use program::{
    robustness_primal, standard_steering_robustness, tripartite_robustness, witness_dual, ClassicalDecomposition,
    Robustness, TripartiteModel,
};
pub use scenarios::{
    bisect_visibility, critical_visibility, graph_state, rsp_assemblage, rsp_entanglement_assemblage, tripartite_assemblage,
    x3_assemblage, x3_state, CriticalVisibility, SteeringScenario, VisibilityOptions,
};

const STATE_TOL: f64 = 1e-10;
/// Largest setting count for which the `2^l` strategies are enumerated.
pub const MAX_STEERING_SETTINGS: usize = 8;

/// Which rows of an extended assemblage enter the compatibility test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataRegime {
    Observational,
    Interventional,
}

/// `obs[x][a] = σ_{a|x}` and `do_[a] = σ_{do(a)}` on Bob's qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AssemblageWire", into = "AssemblageWire")]
pub struct ExtendedAssemblage {
    pub obs: Vec<[Herm2; 2]>,
    pub do_: [Herm2; 2],
}

impl ExtendedAssemblage {
    pub fn new(obs: Vec<[Herm2; 2]>, do_: [Herm2; 2]) -> Result<Self, HybridError> {
        let e = ExtendedAssemblage { obs, do_ };
        e.validate()?;
        Ok(e)
    }

    pub fn num_settings(&self) -> usize {
        self.obs.len()
    }

    pub fn validate(&self) -> Result<(), HybridError> {
        if self.obs.is_empty() {
            return Err(HybridError::Structural("assemblage needs at least one setting".into()));
        }
        for (x, pair) in self.obs.iter().enumerate() {
            let t = pair[0].trace() + pair[1].trace();
            if (t - 1.0).abs() > STATE_TOL {
                return Err(HybridError::Domain(format!("setting {x}: traces sum to {t}")));
            }
            check_psd(pair, &format!("σ(·|{x})"))?;
        }
        for (a, s) in self.do_.iter().enumerate() {
            if (s.trace() - 1.0).abs() > STATE_TOL {
                return Err(HybridError::Domain(format!("σ(do {a}) has trace {}", s.trace())));
            }
        }
        check_psd(&self.do_, "σ(do ·)")
    }

    /// `p·self + (1−p)·other`.
    pub fn mixture(&self, other: &ExtendedAssemblage, p: f64) -> Result<Self, HybridError> {
        if self.num_settings() != other.num_settings() {
            return Err(HybridError::Structural("assemblages differ in setting count".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(HybridError::Domain(format!("mixing weight {p} outside [0, 1]")));
        }
        let mix = |s: &Herm2, o: &Herm2| *s * p + *o * (1.0 - p);
        let obs = self.obs.iter().zip(&other.obs).map(|(s, o)| [mix(&s[0], &o[0]), mix(&s[1], &o[1])]).collect();
        Ok(ExtendedAssemblage { obs, do_: [mix(&self.do_[0], &other.do_[0]), mix(&self.do_[1], &other.do_[1])] })
    }

    /// Assemblage of a classical model: `σ_{a|x} = Σ_λ p(λ) [f_λ(x) = a] ρ_{a,λ}` and
    /// `σ_{do(a)} = Σ_λ p(λ) ρ_{a,λ}`, with `states[λ][a]` normalized.
    pub fn classical(l: usize, weights: &[f64], states: &[[Herm2; 2]]) -> Result<Self, HybridError> {
        check_settings(l)?;
        if weights.len() != 1 << l || states.len() != 1 << l {
            return Err(HybridError::Structural(format!("need {} strategies", 1usize << l)));
        }
        let mut obs = vec![[Herm2::ZERO; 2]; l];
        let mut do_ = [Herm2::ZERO; 2];
        for (lam, (&w, rho)) in weights.iter().zip(states).enumerate() {
            for (x, row) in obs.iter_mut().enumerate() {
                let a = response(lam, x);
                row[a] += rho[a] * w;
            }
            for a in 0..2 {
                do_[a] += rho[a] * w;
            }
        }
        ExtendedAssemblage::new(obs, do_)
    }

    pub fn observational_value(&self, w: &SteeringWitness) -> f64 {
        self.obs.iter().zip(&w.w).map(|(s, wx)| s[0].dot(&wx[0]) + s[1].dot(&wx[1])).sum()
    }

    pub fn interventional_value(&self, w: &SteeringWitness) -> f64 {
        self.do_[0].dot(&w.v[0]) + self.do_[1].dot(&w.v[1])
    }
}

/// `obs[x][y][a][b] = σ_{a,b|x,y}` and `do_[x][a][b] = σ_{a,do(b)|x}` on Charlie's qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct TripartiteAssemblage {
    pub obs: [[[[Herm2; 2]; 2]; 2]; 2],
    pub do_: [[[Herm2; 2]; 2]; 2],
}

impl TripartiteAssemblage {
    pub fn validate(&self) -> Result<(), HybridError> {
        for x in 0..2 {
            for y in 0..2 {
                let t: f64 = self.obs[x][y].iter().flatten().map(Herm2::trace).sum();
                if (t - 1.0).abs() > STATE_TOL {
                    return Err(HybridError::Domain(format!("settings ({x}, {y}): traces sum to {t}")));
                }
                for row in &self.obs[x][y] {
                    check_psd(row, "σ(·,·|x,y)")?;
                }
            }
            for b in 0..2 {
                let t = self.do_[x][0][b].trace() + self.do_[x][1][b].trace();
                if (t - 1.0).abs() > STATE_TOL {
                    return Err(HybridError::Domain(format!("σ(·, do {b}|{x}): traces sum to {t}")));
                }
            }
            for row in &self.do_[x] {
                check_psd(row, "σ(·,do ·|x)")?;
            }
        }
        Ok(())
    }
}

/// Dual solution of the compatibility SDP: `w[x][a] = W_{a,x}`, `v[a] = V_a`, and per-strategy
/// shifts `delta_xi[λ][a]` (summing to 0) and `delta_zeta[λ][a]` (summing to 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WitnessWire", into = "WitnessWire")]
pub struct SteeringWitness {
    pub w: Vec<[Herm2; 2]>,
    pub v: [Herm2; 2],
    pub delta_xi: Vec<[f64; 2]>,
    pub delta_zeta: Vec<[f64; 2]>,
}

impl SteeringWitness {
    pub fn zero(l: usize) -> Self {
        SteeringWitness {
            w: vec![[Herm2::ZERO; 2]; l],
            v: [Herm2::ZERO; 2],
            delta_xi: vec![[0.0; 2]; 1 << l],
            delta_zeta: vec![[0.5; 2]; 1 << l],
        }
    }

    pub fn num_settings(&self) -> usize {
        self.w.len()
    }

    /// `K_{a,λ} = Σ_{x: f_λ(x) = a} W_{a,x} + V_a`, the operator the dual constraints bound.
    pub fn strategy_operator(&self, lam: usize, a: usize) -> Herm2 {
        (0..self.num_settings()).filter(|&x| response(lam, x) == a).fold(self.v[a], |acc, x| acc + self.w[x][a])
    }
}

/// Outcome of [`verify_witness`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub feasible: bool,
    /// Smallest slack over all dual constraints; negative when infeasible.
    pub worst_margin: f64,
    pub worst_strategy: usize,
    pub observational_value: f64,
    pub interventional_value: f64,
    pub total_value: f64,
    pub prop3_rhs: f64,
    pub useful: bool,
    pub usefulness_lhs: f64,
    pub delta_xi: Vec<[f64; 2]>,
    pub delta_zeta: Vec<[f64; 2]>,
}

/// Checks dual feasibility of `w` and evaluates it on `e`.
///
/// Shifts satisfying both constraint families exist iff, for every `λ`,
/// `Σ_a λ_max(K_{a,λ}) ≤ 0` and `Σ_a λ_max(−K_{a,λ}) ≤ 1`. The report carries the shifts that
/// split the slack evenly, and the worst slack.
pub fn verify_witness(w: &SteeringWitness, e: &ExtendedAssemblage, tol: f64) -> Result<WitnessReport, HybridError> {
    let l = w.num_settings();
    check_settings(l)?;
    if e.num_settings() != l {
        return Err(HybridError::Structural(format!("witness has {l} settings, assemblage {}", e.num_settings())));
    }
    let mut worst_margin = f64::INFINITY;
    let mut worst_strategy = 0;
    let mut delta_xi = Vec::with_capacity(1 << l);
    let mut delta_zeta = Vec::with_capacity(1 << l);
    for lam in 0..1 << l {
        let k = [w.strategy_operator(lam, 0), w.strategy_operator(lam, 1)];
        let top = [k[0].max_eigenvalue(), k[1].max_eigenvalue()];
        let bottom = [-k[0].min_eigenvalue(), -k[1].min_eigenvalue()];
        let upper = -(top[0] + top[1]);
        let lower = 1.0 - (bottom[0] + bottom[1]);
        delta_xi.push([top[0] + upper / 2.0, top[1] + upper / 2.0]);
        delta_zeta.push([bottom[0] + lower / 2.0, bottom[1] + lower / 2.0]);
        let m = upper.min(lower);
        if m < worst_margin {
            worst_margin = m;
            worst_strategy = lam;
        }
    }
    let observational_value = e.observational_value(w);
    let interventional_value = e.interventional_value(w);
    let (prop3_rhs, useful) = prop3_bound(w);
    Ok(WitnessReport {
        feasible: worst_margin >= -tol,
        worst_margin,
        worst_strategy,
        observational_value,
        interventional_value,
        total_value: observational_value + interventional_value,
        prop3_rhs,
        useful,
        usefulness_lhs: usefulness_lhs(w),
        delta_xi,
        delta_zeta,
    })
}

/// `(Σ_a ‖V_a⁻‖_∞, usefulness)`: a classical assemblage cannot give an observational value
/// above the first entry, and the witness can only detect anything observationally when
/// `Σ_x max_a ‖W_{a,x}⁺‖_∞` reaches it.
pub fn prop3_bound(w: &SteeringWitness) -> (f64, bool) {
    let rhs: f64 = w.v.iter().map(|v| v.negative_part().norm_inf()).sum();
    (rhs, usefulness_lhs(w) >= rhs)
}

fn usefulness_lhs(w: &SteeringWitness) -> f64 {
    w.w.iter().map(|wx| wx[0].positive_part().norm_inf().max(wx[1].positive_part().norm_inf())).sum()
}

/// Channel on Bob's qubit given by Kraus operators.
#[derive(Clone, Debug)]
pub struct Channel {
    pub kraus: Vec<CMatrix>,
}

impl Channel {
    pub fn identity() -> Self {
        Channel { kraus: vec![CMatrix::identity(2, 2)] }
    }

    pub fn unitary(u: CMatrix) -> Self {
        Channel { kraus: vec![u] }
    }

    pub fn validate(&self) -> Result<(), HybridError> {
        if self.kraus.is_empty() || self.kraus.iter().any(|k| k.shape() != (2, 2)) {
            return Err(HybridError::Model("channel needs 2x2 Kraus operators".into()));
        }
        let sum: CMatrix = self.kraus.iter().map(|k| k.adjoint() * k).sum();
        let defect = (sum - CMatrix::identity(2, 2)).map(|z| z.norm()).max();
        if defect > 1e-9 {
            return Err(HybridError::Model(format!("channel is not trace preserving (defect {defect:.2e})")));
        }
        Ok(())
    }

    /// Applies the channel to the second qubit of a two-qubit operator.
    fn apply_second(&self, rho: &CMatrix) -> CMatrix {
        let id = CMatrix::identity(2, 2);
        self.kraus.iter().map(|k| {
            let big = kron(&id, k);
            &big * rho * big.adjoint()
        }).sum()
    }
}

/// `σ_{a|x} = tr_A[(M_x^{(a)} ⊗ 𝟙) (𝟙 ⊗ E_a)(ρ)]` and `σ_{do(a)} = E_a(tr_A ρ)`.
pub fn assemblage_from_model(
    state: &CMatrix,
    alice: &[[CMatrix; 2]],
    channels: &[Channel; 2],
) -> Result<ExtendedAssemblage, HybridError> {
    validate_state(state, 4)?;
    for (x, povm) in alice.iter().enumerate() {
        validate_povm(povm, &format!("setting {x}"))?;
    }
    for ch in channels {
        ch.validate()?;
    }
    let id = CMatrix::identity(2, 2);
    let evolved = [channels[0].apply_second(state), channels[1].apply_second(state)];
    let obs = alice
        .iter()
        .map(|povm| {
            let mut row = [Herm2::ZERO; 2];
            for a in 0..2 {
                row[a] = matrix_to_herm2(&partial_trace_first(&(kron(&povm[a], &id) * &evolved[a]), 2, 2));
            }
            row
        })
        .collect();
    let do_ = [0, 1].map(|a| matrix_to_herm2(&partial_trace_first(&evolved[a], 2, 2)));
    let e = ExtendedAssemblage { obs, do_ };
    for (x, row) in e.obs.iter().enumerate() {
        let t = row[0].trace() + row[1].trace();
        if (t - 1.0).abs() > 1e-9 {
            return Err(HybridError::Model(format!("setting {x}: trace deficit {:.2e}", 1.0 - t)));
        }
    }
    e.validate()?;
    Ok(e)
}

pub(crate) fn validate_state(rho: &CMatrix, dim: usize) -> Result<(), HybridError> {
    if rho.shape() != (dim, dim) {
        return Err(HybridError::Model(format!("state must be {dim}x{dim}")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(HybridError::Model(format!("state trace {tr}")));
    }
    if hybrid_bell_solver::linalg::hermitian_defect(rho) > 1e-9 {
        return Err(HybridError::Model("state is not Hermitian".into()));
    }
    if hybrid_bell_solver::linalg::min_eigenvalue(rho) < -1e-9 {
        return Err(HybridError::Model("state is not positive semidefinite".into()));
    }
    Ok(())
}

pub(crate) fn validate_povm(povm: &[CMatrix; 2], what: &str) -> Result<(), HybridError> {
    for m in povm {
        if m.shape() != (2, 2) || hybrid_bell_solver::linalg::min_eigenvalue(m) < -1e-9 {
            return Err(HybridError::Model(format!("{what}: effects must be 2x2 PSD")));
        }
    }
    let defect = (&povm[0] + &povm[1] - CMatrix::identity(2, 2)).map(|z| z.norm()).max();
    if defect > 1e-9 {
        return Err(HybridError::Model(format!("{what}: effects do not sum to identity ({defect:.2e})")));
    }
    Ok(())
}

/// `f_λ(x)` for the bit-packed strategy index.
pub(crate) fn response(lam: usize, x: usize) -> usize {
    (lam >> x) & 1
}

fn check_settings(l: usize) -> Result<(), HybridError> {
    if l == 0 {
        return Err(HybridError::Structural("need at least one setting".into()));
    }
    if l > MAX_STEERING_SETTINGS {
        return Err(HybridError::Capacity(format!("{l} settings exceed the limit of {MAX_STEERING_SETTINGS}")));
    }
    Ok(())
}

fn check_psd(ops: &[Herm2], what: &str) -> Result<(), HybridError> {
    match ops.iter().map(Herm2::min_eigenvalue).find(|&m| m < -STATE_TOL) {
        Some(m) => Err(HybridError::Domain(format!("{what} has eigenvalue {m}"))),
        None => Ok(()),
    }
}

/// Default SDP settings for the steering programs.
pub fn steering_sdp_options() -> SdpOptions {
    SdpOptions::default()
}

/// Residual thresholds a solve must meet to be reported.
pub(crate) fn check_residuals(r: &SdpResiduals) -> Result<(), HybridError> {
    let feas = r.primal.max(r.primal_cone).max(r.dual_cone);
    if feas > 1e-8 || r.gap() > 1e-6 {
        return Err(HybridError::Solver(hybrid_bell_solver::SolverError::Numerical(format!(
            "SDP did not converge: primal {:.1e}, primal cone {:.1e}, dual cone {:.1e}, gap {:.1e}",
            r.primal,
            r.primal_cone,
            r.dual_cone,
            r.gap()
        ))));
    }
    Ok(())
}

// JSON layout: complex entries as [re, im], matrices row-major.

type MatrixWire = [[[f64; 2]; 2]; 2];

pub(crate) fn herm_to_wire(h: &Herm2) -> MatrixWire {
    let m = h.to_complex();
    m.map(|row| row.map(|z| [z.re, z.im]))
}

pub(crate) fn herm_from_wire(m: &MatrixWire) -> Result<Herm2, HybridError> {
    let z = m.map(|row| row.map(|e| Complex64::new(e[0], e[1])));
    let defect = (z[0][1] - z[1][0].conj()).norm().max(z[0][0].im.abs()).max(z[1][1].im.abs());
    if defect > 1e-9 {
        return Err(HybridError::Parse(format!("matrix is not Hermitian (defect {defect:.2e})")));
    }
    Ok(Herm2::from_complex(z))
}

#[derive(Serialize, Deserialize)]
struct AssemblageWire {
    /// `obs[x][a]`.
    obs: Vec<[MatrixWire; 2]>,
    #[serde(rename = "do")]
    do_: [MatrixWire; 2],
}

impl From<ExtendedAssemblage> for AssemblageWire {
    fn from(e: ExtendedAssemblage) -> Self {
        AssemblageWire {
            obs: e.obs.iter().map(|r| [herm_to_wire(&r[0]), herm_to_wire(&r[1])]).collect(),
            do_: [herm_to_wire(&e.do_[0]), herm_to_wire(&e.do_[1])],
        }
    }
}

impl TryFrom<AssemblageWire> for ExtendedAssemblage {
    type Error = HybridError;

    fn try_from(w: AssemblageWire) -> Result<Self, HybridError> {
        let obs = w
            .obs
            .iter()
            .map(|r| Ok([herm_from_wire(&r[0])?, herm_from_wire(&r[1])?]))
            .collect::<Result<Vec<_>, HybridError>>()?;
        ExtendedAssemblage::new(obs, [herm_from_wire(&w.do_[0])?, herm_from_wire(&w.do_[1])?])
    }
}

#[derive(Serialize, Deserialize)]
struct WitnessWire {
    /// `W[x][a]`.
    #[serde(rename = "W")]
    w: Vec<[MatrixWire; 2]>,
    #[serde(rename = "V")]
    v: [MatrixWire; 2],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    delta_xi: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    delta_zeta: Vec<[f64; 2]>,
}

impl From<SteeringWitness> for WitnessWire {
    fn from(w: SteeringWitness) -> Self {
        WitnessWire {
            w: w.w.iter().map(|r| [herm_to_wire(&r[0]), herm_to_wire(&r[1])]).collect(),
            v: [herm_to_wire(&w.v[0]), herm_to_wire(&w.v[1])],
            delta_xi: w.delta_xi,
            delta_zeta: w.delta_zeta,
        }
    }
}

impl TryFrom<WitnessWire> for SteeringWitness {
    type Error = HybridError;

    fn try_from(w: WitnessWire) -> Result<Self, HybridError> {
        let ws = w
            .w
            .iter()
            .map(|r| Ok([herm_from_wire(&r[0])?, herm_from_wire(&r[1])?]))
            .collect::<Result<Vec<_>, HybridError>>()?;
        let l = ws.len();
        check_settings(l)?;
        let n = 1 << l;
        for (name, d) in [("delta_xi", &w.delta_xi), ("delta_zeta", &w.delta_zeta)] {
            if !d.is_empty() && d.len() != n {
                return Err(HybridError::Structural(format!("{name} needs {n} entries")));
            }
        }
        Ok(SteeringWitness {
            w: ws,
            v: [herm_from_wire(&w.v[0])?, herm_from_wire(&w.v[1])?],
            delta_xi: if w.delta_xi.is_empty() { vec![[0.0; 2]; n] } else { w.delta_xi },
            delta_zeta: if w.delta_zeta.is_empty() { vec![[0.5; 2]; n] } else { w.delta_zeta },
        })
    }
}
