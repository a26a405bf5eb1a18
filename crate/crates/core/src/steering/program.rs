//! The classical-compatibility SDP shared by all scenarios.
//!
//! Every scenario reduces to: strategies `λ`, labels `t` (Bob's or Charlie's input from the
//! black-box side), and data rows `σ_k + Σ_{(λ,t)∈k} ζ_{t,λ} = Σ_{(λ,t)∈k} ξ_{t,λ}` with
//! `ζ, ξ ⪰ 0` and `tr ζ_{t,λ}`, `tr ξ_{t,λ}` independent of `t`. The objective is
//! `Σ_λ tr ζ_{0,λ}`.

use hybrid_bell_solver::{
    hermitian_from_duals, sdp_solve, Herm2, SdpConstraint, SdpModel, SdpOptions, SdpResiduals, SdpStatus,
};
use serde::{Deserialize, Serialize};

use super::{check_residuals, check_settings, response, DataRegime, ExtendedAssemblage, SteeringWitness, TripartiteAssemblage};
use crate::HybridError;

/// Robustness values above this are reported as capped.
pub const TAU_CAP: f64 = 1e3;

const SIGNALING_TOL: f64 = 1e-9;

struct DataRow {
    target: Herm2,
    members: Vec<(usize, usize)>,
}

struct ClassicalProgram {
    strategies: usize,
    labels: usize,
    rows: Vec<DataRow>,
}

struct ProgramSolution {
    tau: f64,
    dual_objective: f64,
    zeta: Vec<Vec<Herm2>>,
    xi: Vec<Vec<Herm2>>,
    row_duals: Vec<Herm2>,
    delta_zeta: Vec<Vec<f64>>,
    delta_xi: Vec<Vec<f64>>,
    residuals: SdpResiduals,
    status: SdpStatus,
    iterations: usize,
}

impl ClassicalProgram {
    fn zeta(&self, lam: usize, t: usize) -> usize {
        2 * (lam * self.labels + t)
    }

    fn xi(&self, lam: usize, t: usize) -> usize {
        self.zeta(lam, t) + 1
    }

    fn solve(&self, opts: &SdpOptions) -> Result<ProgramSolution, HybridError> {
        let mut m = SdpModel::new();
        for _ in 0..self.strategies {
            for t in 0..self.labels {
                m.add_block(if t == 0 { Herm2::IDENTITY } else { Herm2::ZERO });
                m.add_block(Herm2::ZERO);
            }
        }
        let mut row_idx = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let terms: Vec<(usize, f64)> =
                row.members.iter().flat_map(|&(lam, t)| [(self.xi(lam, t), 1.0), (self.zeta(lam, t), -1.0)]).collect();
            row_idx.push(m.add_matrix_equality(&terms, row.target));
        }
        // trace_idx[λ][t−1] = (ζ row, ξ row) for tr X_{0,λ} − tr X_{t,λ} = 0.
        let mut trace_idx = vec![Vec::new(); self.strategies];
        for (lam, slot) in trace_idx.iter_mut().enumerate() {
            for t in 1..self.labels {
                let mut pair = [0; 2];
                for (k, block) in [(0, Self::zeta as fn(&Self, usize, usize) -> usize), (1, Self::xi)] {
                    pair[k] = m.add_constraint(SdpConstraint {
                        blocks: vec![(block(self, lam, 0), Herm2::IDENTITY), (block(self, lam, t), -Herm2::IDENTITY)],
                        scalars: Vec::new(),
                        rhs: 0.0,
                    });
                }
                slot.push(pair);
            }
        }
        let sol = sdp_solve(&m, opts)?;
        check_residuals(&sol.residuals)?;

        let row_duals: Vec<Herm2> = row_idx.iter().map(|idx| hermitian_from_duals(idx.map(|i| sol.duals[i]))).collect();
        let mut delta_zeta = Vec::with_capacity(self.strategies);
        let mut delta_xi = Vec::with_capacity(self.strategies);
        for pairs in &trace_idx {
            let dz: Vec<f64> = pairs.iter().map(|p| sol.duals[p[0]]).collect();
            let dx: Vec<f64> = pairs.iter().map(|p| sol.duals[p[1]]).collect();
            let mut z = vec![1.0 - dz.iter().sum::<f64>()];
            z.extend(&dz);
            let mut x = vec![-dx.iter().sum::<f64>()];
            x.extend(&dx);
            delta_zeta.push(z);
            delta_xi.push(x);
        }
        let per_strategy = |f: fn(&Self, usize, usize) -> usize| -> Vec<Vec<Herm2>> {
            (0..self.strategies).map(|lam| (0..self.labels).map(|t| sol.blocks[f(self, lam, t)]).collect()).collect()
        };
        Ok(ProgramSolution {
            tau: sol.residuals.primal_objective,
            dual_objective: sol.residuals.dual_objective,
            zeta: per_strategy(Self::zeta),
            xi: per_strategy(Self::xi),
            row_duals,
            delta_zeta,
            delta_xi,
            residuals: sol.residuals,
            status: sol.status,
            iterations: sol.iterations,
        })
    }
}

/// Classical model reached after adding the optimal noise: `zeta[λ][t]` is the noise,
/// `xi[λ][t]` the (unnormalized) hidden states of the mixture.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalDecomposition {
    pub zeta: Vec<Vec<Herm2>>,
    pub xi: Vec<Vec<Herm2>>,
}

#[derive(Clone, Debug)]
pub struct Robustness {
    pub tau: f64,
    /// Dual objective of the same solve; equals `tau` up to the duality gap.
    pub dual_objective: f64,
    pub capped: bool,
    pub certificate: ClassicalDecomposition,
    pub residuals: SdpResiduals,
    pub status: SdpStatus,
    pub iterations: usize,
}

impl Robustness {
    /// Mixing weight `p = τ/(1+τ)` of the noise.
    pub fn noise_weight(&self) -> f64 {
        self.tau / (1.0 + self.tau)
    }
}

impl From<ProgramSolution> for Robustness {
    fn from(s: ProgramSolution) -> Self {
        let capped = s.tau > TAU_CAP;
        Robustness {
            tau: s.tau.clamp(0.0, TAU_CAP),
            dual_objective: s.dual_objective,
            capped,
            certificate: ClassicalDecomposition { zeta: s.zeta, xi: s.xi },
            residuals: s.residuals,
            status: s.status,
            iterations: s.iterations,
        }
    }
}

fn bipartite_program(e: &ExtendedAssemblage, regime: DataRegime) -> Result<ClassicalProgram, HybridError> {
    e.validate()?;
    let l = e.num_settings();
    check_settings(l)?;
    let strategies = 1 << l;
    let mut rows = Vec::new();
    for (x, pair) in e.obs.iter().enumerate() {
        for (a, s) in pair.iter().enumerate() {
            let members = (0..strategies).filter(|&lam| response(lam, x) == a).map(|lam| (lam, a)).collect();
            rows.push(DataRow { target: *s, members });
        }
    }
    if regime == DataRegime::Interventional {
        for (a, s) in e.do_.iter().enumerate() {
            rows.push(DataRow { target: *s, members: (0..strategies).map(|lam| (lam, a)).collect() });
        }
    }
    Ok(ClassicalProgram { strategies, labels: 2, rows })
}

/// Minimal classical noise `τ` (primal) with the classical decomposition it reaches.
pub fn robustness_primal(e: &ExtendedAssemblage, regime: DataRegime, opts: &SdpOptions) -> Result<Robustness, HybridError> {
    Ok(bipartite_program(e, regime)?.solve(opts)?.into())
}

/// Optimal witness from the dual of the same program, with its objective value.
///
/// In the observational regime the returned `V_a` are zero.
pub fn witness_dual(
    e: &ExtendedAssemblage,
    regime: DataRegime,
    opts: &SdpOptions,
) -> Result<(SteeringWitness, f64), HybridError> {
    let l = e.num_settings();
    let sol = bipartite_program(e, regime)?.solve(opts)?;
    let w = (0..l).map(|x| [sol.row_duals[2 * x], sol.row_duals[2 * x + 1]]).collect();
    let v = match regime {
        DataRegime::Interventional => [sol.row_duals[2 * l], sol.row_duals[2 * l + 1]],
        DataRegime::Observational => [Herm2::ZERO; 2],
    };
    let pair = |d: &Vec<f64>| [d[0], d[1]];
    let witness = SteeringWitness {
        w,
        v,
        delta_xi: sol.delta_xi.iter().map(pair).collect(),
        delta_zeta: sol.delta_zeta.iter().map(pair).collect(),
    };
    Ok((witness, sol.dual_objective))
}

/// Largest deviation of `Σ_a σ_{a|x}` from its value at `x = 0`.
fn signaling(e: &ExtendedAssemblage) -> f64 {
    let reduced = |x: usize| e.obs[x][0] + e.obs[x][1];
    (1..e.num_settings()).map(|x| (reduced(x) - reduced(0)).max_abs()).fold(0.0, f64::max)
}

/// Robustness against models without communication: one hidden state per `λ`, no
/// interventional rows.
///
/// Only defined for no-signaling assemblages; adding noise cannot repair an `x`-dependent
/// reduced state.
pub fn standard_steering_robustness(e: &ExtendedAssemblage, opts: &SdpOptions) -> Result<Robustness, HybridError> {
    e.validate()?;
    let l = e.num_settings();
    check_settings(l)?;
    let s = signaling(e);
    if s > SIGNALING_TOL {
        return Err(HybridError::Domain(format!("assemblage signals (Σ_a σ_a|x varies by {s:.2e}); no standard steering model exists")));
    }
    let strategies = 1 << l;
    let mut rows = Vec::new();
    for (x, pair) in e.obs.iter().enumerate() {
        for (a, s) in pair.iter().enumerate() {
            let members = (0..strategies).filter(|&lam| response(lam, x) == a).map(|lam| (lam, 0)).collect();
            rows.push(DataRow { target: *s, members });
        }
    }
    Ok(ClassicalProgram { strategies, labels: 1, rows }.solve(opts)?.into())
}

/// Classical models for the tripartite scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripartiteModel {
    /// Charlie's hidden state may depend on `b` (a `B → C` edge).
    Communicating,
    /// Charlie's hidden state depends on `λ` only.
    NoInfluence,
}

/// Robustness of a tripartite assemblage against the 64 strategies `λ = (f, g)` with
/// `a = f(x)`, `b = g(y, a)`.
pub fn tripartite_robustness(
    e: &TripartiteAssemblage,
    regime: DataRegime,
    model: TripartiteModel,
    opts: &SdpOptions,
) -> Result<Robustness, HybridError> {
    e.validate()?;
    let f = |lam: usize, x: usize| (lam >> x) & 1;
    let g = |lam: usize, y: usize, a: usize| (lam >> (2 + 2 * y + a)) & 1;
    let label = |b: usize| if model == TripartiteModel::Communicating { b } else { 0 };
    let mut rows = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let members =
                        (0..64).filter(|&lam| f(lam, x) == a && g(lam, y, a) == b).map(|lam| (lam, label(b))).collect();
                    rows.push(DataRow { target: e.obs[x][y][a][b], members });
                }
            }
        }
    }
    if regime == DataRegime::Interventional {
        for x in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let members = (0..64).filter(|&lam| f(lam, x) == a).map(|lam| (lam, label(b))).collect();
                    rows.push(DataRow { target: e.do_[x][a][b], members });
                }
            }
        }
    }
    let labels = if model == TripartiteModel::Communicating { 2 } else { 1 };
    Ok(ClassicalProgram { strategies: 64, labels, rows }.solve(opts)?.into())
}
