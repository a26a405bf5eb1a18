//! Semidefinite programs over 2x2 Hermitian blocks and nonnegative scalars.
//!
//! Primal: minimize `Σ tr[C_k X_k] + Σ c_s x_s` subject to
//! `Σ_k tr[A_ik X_k] + Σ_s a_is x_s = b_i`, `X_k ⪰ 0`, `x_s ≥ 0`.
//! Dual: maximize `b·y` subject to `S_k = C_k − Σ_i y_i A_ik ⪰ 0` and `c_s − Σ_i y_i a_is ≥ 0`.
//!
//! The default engine is a primal-dual interior-point method (HKM direction with Mehrotra
//! correction). An ADMM engine on the dual is available for cross-checks.

use nalgebra::{DMatrix, DVector};

use crate::herm2::{max_psd_step, psd_project_2x2, Herm2, Mat2};
use crate::SolverError;

/// One linear equality over block traces and scalar variables.
#[derive(Clone, Debug, Default)]
pub struct SdpConstraint {
    pub blocks: Vec<(usize, Herm2)>,
    pub scalars: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default)]
pub struct SdpModel {
    pub block_costs: Vec<Herm2>,
    pub scalar_costs: Vec<f64>,
    pub constraints: Vec<SdpConstraint>,
}

impl SdpModel {
    pub fn new() -> Self {
        SdpModel::default()
    }

    /// Adds a PSD block variable with objective `tr[cost·X]`; returns its index.
    pub fn add_block(&mut self, cost: Herm2) -> usize {
        self.block_costs.push(cost);
        self.block_costs.len() - 1
    }

    /// Adds a nonnegative scalar with objective `cost·x`; returns its index.
    pub fn add_scalar(&mut self, cost: f64) -> usize {
        self.scalar_costs.push(cost);
        self.scalar_costs.len() - 1
    }

    pub fn add_constraint(&mut self, c: SdpConstraint) -> usize {
        self.constraints.push(c);
        self.constraints.len() - 1
    }

    /// Adds the four real equalities `Σ_k coef_k·X_k (+ scalars) = target` entry by entry.
    ///
    /// Returns the constraint indices in the order `[00, 11, Re 01, Im 01]`; the matching
    /// dual multipliers `y` assemble the Hermitian multiplier `Σ_j y_j E_j` via
    /// [`hermitian_basis`].
    pub fn add_matrix_equality(&mut self, terms: &[(usize, f64)], target: Herm2) -> [usize; 4] {
        let basis = hermitian_basis();
        let rhs = [target.a, target.d, target.re, target.im];
        let mut idx = [0; 4];
        for j in 0..4 {
            let blocks = terms.iter().map(|&(k, c)| (k, basis[j] * c)).collect();
            idx[j] = self.add_constraint(SdpConstraint { blocks, scalars: Vec::new(), rhs: rhs[j] });
        }
        idx
    }

    pub fn num_blocks(&self) -> usize {
        self.block_costs.len()
    }

    pub fn num_scalars(&self) -> usize {
        self.scalar_costs.len()
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        for (i, c) in self.constraints.iter().enumerate() {
            if c.blocks.iter().any(|(k, _)| *k >= self.num_blocks())
                || c.scalars.iter().any(|(s, _)| *s >= self.num_scalars())
            {
                return Err(SolverError::Dimension(format!("constraint {i} references a missing variable")));
            }
        }
        Ok(())
    }

    fn apply(&self, x: &[Herm2], xs: &[f64]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| {
                c.blocks.iter().map(|(k, a)| a.dot(&x[*k])).sum::<f64>()
                    + c.scalars.iter().map(|(s, a)| a * xs[*s]).sum::<f64>()
            })
            .collect()
    }

    fn adjoint(&self, y: &[f64]) -> (Vec<Herm2>, Vec<f64>) {
        let mut blocks = vec![Herm2::ZERO; self.num_blocks()];
        let mut scalars = vec![0.0; self.num_scalars()];
        for (c, yi) in self.constraints.iter().zip(y) {
            if *yi == 0.0 {
                continue;
            }
            for (k, a) in &c.blocks {
                blocks[*k] += *a * *yi;
            }
            for (s, a) in &c.scalars {
                scalars[*s] += a * yi;
            }
        }
        (blocks, scalars)
    }

    /// Residual report for a candidate primal/dual pair.
    pub fn audit(&self, x: &[Herm2], xs: &[f64], y: &[f64]) -> SdpResiduals {
        let ax = self.apply(x, xs);
        let primal = self.constraints.iter().zip(&ax).map(|(c, v)| (c.rhs - v).abs()).fold(0.0, f64::max);
        let primal_cone = x
            .iter()
            .map(|b| -b.min_eigenvalue())
            .chain(xs.iter().map(|v| -v))
            .fold(0.0, f64::max);
        let (aty, atys) = self.adjoint(y);
        let dual_cone = self
            .block_costs
            .iter()
            .zip(&aty)
            .map(|(c, a)| -(*c - *a).min_eigenvalue())
            .chain(self.scalar_costs.iter().zip(&atys).map(|(c, a)| a - c))
            .fold(0.0, f64::max);
        let pobj = self.block_costs.iter().zip(x).map(|(c, v)| c.dot(v)).sum::<f64>()
            + self.scalar_costs.iter().zip(xs).map(|(c, v)| c * v).sum::<f64>();
        let dobj = self.constraints.iter().zip(y).map(|(c, v)| c.rhs * v).sum::<f64>();
        SdpResiduals { primal, primal_cone, dual_cone, primal_objective: pobj, dual_objective: dobj }
    }
}

/// The real basis `E₁ = |0⟩⟨0|`, `E₂ = |1⟩⟨1|`, `E₃`, `E₄` with `tr[E₃X] = Re X₀₁`, `tr[E₄X] = Im X₀₁`.
pub fn hermitian_basis() -> [Herm2; 4] {
    [
        Herm2::diag(1.0, 0.0),
        Herm2::diag(0.0, 1.0),
        Herm2 { a: 0.0, d: 0.0, re: 0.5, im: 0.0 },
        Herm2 { a: 0.0, d: 0.0, re: 0.0, im: 0.5 },
    ]
}

/// Hermitian multiplier `Σ_j y_j E_j` for the four duals of an [`SdpModel::add_matrix_equality`].
pub fn hermitian_from_duals(y: [f64; 4]) -> Herm2 {
    let basis = hermitian_basis();
    (0..4).fold(Herm2::ZERO, |acc, j| acc + basis[j] * y[j])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdpResiduals {
    /// Max absolute equality violation.
    pub primal: f64,
    /// Most negative eigenvalue of any primal block (as a positive number), 0 if feasible.
    pub primal_cone: f64,
    /// Most negative eigenvalue of any dual slack `C − A*y`, 0 if feasible.
    pub dual_cone: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
}

impl SdpResiduals {
    pub fn gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    /// Iteration cap reached; the best iterate is returned.
    MaxIterations,
    /// Progress stopped before the tolerance was met.
    Stalled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpMethod {
    InteriorPoint,
    Admm,
}

#[derive(Clone, Debug)]
pub struct SdpOptions {
    pub method: SdpMethod,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { method: SdpMethod::InteriorPoint, tolerance: 1e-10, max_iterations: 120 }
    }
}

impl SdpOptions {
    pub fn admm() -> Self {
        SdpOptions { method: SdpMethod::Admm, tolerance: 1e-9, max_iterations: 200_000 }
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub blocks: Vec<Herm2>,
    pub scalars: Vec<f64>,
    /// Dual multiplier per constraint; rows found linearly dependent get 0.
    pub duals: Vec<f64>,
    pub residuals: SdpResiduals,
    pub iterations: usize,
    /// `(primal residual, dual residual)` per iteration.
    pub history: Vec<(f64, f64)>,
}

impl SdpSolution {
    pub fn primal_objective(&self) -> f64 {
        self.residuals.primal_objective
    }

    pub fn dual_objective(&self) -> f64 {
        self.residuals.dual_objective
    }
}

/// Solves the model with the requested engine.
pub fn sdp_solve(model: &SdpModel, opts: &SdpOptions) -> Result<SdpSolution, SolverError> {
    model.validate()?;
    let (keep, reduced) = drop_dependent_rows(model)?;
    let mut sol = match opts.method {
        SdpMethod::InteriorPoint => ipm(&reduced, opts)?,
        SdpMethod::Admm => admm(&reduced, opts)?,
    };
    let mut duals = vec![0.0; model.constraints.len()];
    for (y, &i) in sol.duals.iter().zip(&keep) {
        duals[i] = *y;
    }
    sol.residuals = model.audit(&sol.blocks, &sol.scalars, &duals);
    sol.duals = duals;
    Ok(sol)
}

/// Removes linearly dependent equality rows (checking consistency of their right-hand sides).
fn drop_dependent_rows(model: &SdpModel) -> Result<(Vec<usize>, SdpModel), SolverError> {
    let nb = model.num_blocks();
    let width = 4 * nb + model.num_scalars();
    let dense = |c: &SdpConstraint| {
        let mut v = vec![0.0; width + 1];
        // The √2 weights make the Euclidean product match the trace inner product.
        for (k, a) in &c.blocks {
            v[4 * k] += a.a;
            v[4 * k + 1] += a.d;
            v[4 * k + 2] += std::f64::consts::SQRT_2 * a.re;
            v[4 * k + 3] += std::f64::consts::SQRT_2 * a.im;
        }
        for (s, a) in &c.scalars {
            v[4 * nb + s] += a;
        }
        v[width] = c.rhs;
        v
    };
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut keep = Vec::new();
    for (i, c) in model.constraints.iter().enumerate() {
        let mut v = dense(c);
        let norm0 = v[..width].iter().map(|x| x * x).sum::<f64>().sqrt();
        for _ in 0..2 {
            for b in &basis {
                let p: f64 = v[..width].iter().zip(&b[..width]).map(|(x, y)| x * y).sum();
                if p != 0.0 {
                    for (x, y) in v.iter_mut().zip(b) {
                        *x -= p * y;
                    }
                }
            }
        }
        let norm = v[..width].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-10 * norm0.max(1.0) {
            if v[width].abs() > 1e-8 * (1.0 + c.rhs.abs()) {
                return Err(SolverError::Infeasible(format!("equality {i} contradicts earlier rows")));
            }
            continue;
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
        basis.push(v);
        keep.push(i);
    }
    let reduced = SdpModel {
        block_costs: model.block_costs.clone(),
        scalar_costs: model.scalar_costs.clone(),
        constraints: keep.iter().map(|&i| model.constraints[i].clone()).collect(),
    };
    Ok((keep, reduced))
}

/// Per-block list of `(constraint, coefficient)` pairs.
fn block_incidence(model: &SdpModel) -> (Vec<Vec<(usize, Herm2)>>, Vec<Vec<(usize, f64)>>) {
    let mut blocks = vec![Vec::new(); model.num_blocks()];
    let mut scalars = vec![Vec::new(); model.num_scalars()];
    for (i, c) in model.constraints.iter().enumerate() {
        for (k, a) in &c.blocks {
            blocks[*k].push((i, *a));
        }
        for (s, a) in &c.scalars {
            scalars[*s].push((i, *a));
        }
    }
    (blocks, scalars)
}

fn sym_product(x: &Herm2, d: &Herm2, sinv: &Herm2) -> Herm2 {
    Mat2::from(*x).mul(&Mat2::from(*d)).mul(&Mat2::from(*sinv)).hermitian_part()
}

/// `M_ij = Σ_k Re tr[A_ik L_k A_jk R_k] + Σ_s a_is a_js w_s`, symmetrized.
fn schur_matrix(
    m: usize,
    inc_b: &[Vec<(usize, Herm2)>],
    inc_s: &[Vec<(usize, f64)>],
    left: &[Herm2],
    right: &[Herm2],
    sw: &[f64],
) -> DMatrix<f64> {
    let mut mm = DMatrix::<f64>::zeros(m, m);
    for (k, list) in inc_b.iter().enumerate() {
        if list.is_empty() {
            continue;
        }
        let lk = Mat2::from(left[k]);
        let rk = Mat2::from(right[k]);
        let ls: Vec<Mat2> = list.iter().map(|(_, a)| Mat2::from(*a).mul(&lk)).collect();
        let rs: Vec<Mat2> = list.iter().map(|(_, a)| Mat2::from(*a).mul(&rk)).collect();
        for (p, (i, _)) in list.iter().enumerate() {
            for (q, (j, _)) in list.iter().enumerate() {
                let l = &ls[p].0;
                let r = &rs[q].0;
                let t = l[0][0] * r[0][0] + l[0][1] * r[1][0] + l[1][0] * r[0][1] + l[1][1] * r[1][1];
                mm[(*i, *j)] += t.re;
            }
        }
    }
    for (j, list) in inc_s.iter().enumerate() {
        for (i, ai) in list {
            for (k, ak) in list {
                mm[(*i, *k)] += sw[j] * ai * ak;
            }
        }
    }
    for i in 0..m {
        for j in 0..i {
            let v = 0.5 * (mm[(i, j)] + mm[(j, i)]);
            mm[(i, j)] = v;
            mm[(j, i)] = v;
        }
    }
    mm
}

/// Pulls a near-optimal primal point back onto `Ax = b` with corrections
/// `X_k (A*w)_k X_k + ε (A*w)_k`. The first term barely moves blocks that are close to
/// singular; the Euclidean term lets those move a little when needed. A correction is kept
/// only if the worst of the equality and cone residuals improves.
fn polish_primal(model: &SdpModel, x: &mut Vec<Herm2>, xs: &mut Vec<f64>) {
    let m = model.constraints.len();
    let (inc_b, inc_s) = block_incidence(model);
    let b: Vec<f64> = model.constraints.iter().map(|c| c.rhs).collect();
    let score = |x: &[Herm2], xs: &[f64]| {
        let ax = model.apply(x, xs);
        let eq = b.iter().zip(&ax).map(|(bi, v)| (bi - v).abs()).fold(0.0, f64::max);
        let cone = x.iter().map(|h| -h.min_eigenvalue()).chain(xs.iter().map(|v| -v)).fold(0.0, f64::max);
        eq.max(cone)
    };
    let ident = vec![Herm2::IDENTITY; x.len()];
    let ones = vec![1.0; xs.len()];
    let euclid = schur_matrix(m, &inc_b, &inc_s, &ident, &ident, &ones);
    let mut best = score(x, xs);
    for eps in [0.0, 1e-8, 1e-6, 1e-4] {
        for _ in 0..3 {
            let sw: Vec<f64> = xs.iter().map(|v| v * v + eps).collect();
            let mut g = schur_matrix(m, &inc_b, &inc_s, x, x, &sw) + &euclid * eps;
            let ridge = 1e-14 * (0..m).map(|i| g[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
            for i in 0..m {
                g[(i, i)] += ridge;
            }
            let Some(chol) = g.cholesky() else { break };
            let ax = model.apply(x, xs);
            let r = DVector::from_iterator(m, b.iter().zip(&ax).map(|(bi, v)| bi - v));
            let w = chol.solve(&r);
            let (aw, aws) = model.adjoint(w.as_slice());
            let cand: Vec<Herm2> =
                (0..x.len()).map(|k| x[k] + sym_product(&x[k], &aw[k], &x[k]) + aw[k] * eps).collect();
            let cands: Vec<f64> = (0..xs.len()).map(|j| xs[j] + (xs[j] * xs[j] + eps) * aws[j]).collect();
            let sc = score(&cand, &cands);
            if sc >= best {
                break;
            }
            best = sc;
            *x = cand;
            *xs = cands;
        }
    }
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Direction {
    dx: Vec<Herm2>,
    dxs: Vec<f64>,
    dy: Vec<f64>,
    ds: Vec<Herm2>,
    dss: Vec<f64>,
}

fn ipm(model: &SdpModel, opts: &SdpOptions) -> Result<SdpSolution, SolverError> {
    let m = model.constraints.len();
    let nb = model.num_blocks();
    let ns = model.num_scalars();
    let (inc_b, inc_s) = block_incidence(model);
    let b: Vec<f64> = model.constraints.iter().map(|c| c.rhs).collect();
    let nvar = (2 * nb + ns) as f64;

    let bnorm = norm_inf(&b);
    let cnorm = model
        .block_costs
        .iter()
        .map(|c| c.max_abs())
        .chain(model.scalar_costs.iter().map(|c| c.abs()))
        .fold(0.0, f64::max);
    let anorm = model
        .constraints
        .iter()
        .map(|c| {
            (c.blocks.iter().map(|(_, a)| a.frobenius_sq()).sum::<f64>()
                + c.scalars.iter().map(|(_, a)| a * a).sum::<f64>())
            .sqrt()
        })
        .fold(0.0, f64::max);
    let xi = 10.0f64.max(nvar.sqrt()).max(bnorm * nvar.sqrt() / (1.0 + anorm));
    let eta = 10.0f64.max(nvar.sqrt()).max(cnorm).max(anorm);

    let mut x = vec![Herm2::scaled_identity(xi); nb];
    let mut xs = vec![xi; ns];
    let mut y = vec![0.0; m];
    let mut s = vec![Herm2::scaled_identity(eta); nb];
    let mut ss = vec![eta; ns];

    let mut history = Vec::new();
    let mut status = SdpStatus::MaxIterations;
    let mut iterations = 0;
    let mut best: Option<(f64, Vec<Herm2>, Vec<f64>, Vec<f64>)> = None;
    let mut stall = 0;

    for it in 0..opts.max_iterations {
        iterations = it + 1;
        let ax = model.apply(&x, &xs);
        let rp: Vec<f64> = b.iter().zip(&ax).map(|(bi, v)| bi - v).collect();
        let (aty, atys) = model.adjoint(&y);
        let rd: Vec<Herm2> = (0..nb).map(|k| model.block_costs[k] - aty[k] - s[k]).collect();
        let rds: Vec<f64> = (0..ns).map(|j| model.scalar_costs[j] - atys[j] - ss[j]).collect();

        let pobj = model.block_costs.iter().zip(&x).map(|(c, v)| c.dot(v)).sum::<f64>()
            + model.scalar_costs.iter().zip(&xs).map(|(c, v)| c * v).sum::<f64>();
        let dobj: f64 = b.iter().zip(&y).map(|(bi, yi)| bi * yi).sum();
        let rel_p = norm_inf(&rp) / (1.0 + bnorm);
        let rel_d = rd.iter().map(|r| r.max_abs()).chain(rds.iter().map(|r| r.abs())).fold(0.0, f64::max) / (1.0 + cnorm);
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        history.push((rel_p, rel_d));

        let merit = rel_p.max(rel_d).max(rel_gap);
        if best.as_ref().is_none_or(|(bm, ..)| merit < *bm) {
            best = Some((merit, x.clone(), xs.clone(), y.clone()));
            stall = 0;
        } else {
            stall += 1;
        }
        if rel_p <= opts.tolerance && rel_d <= opts.tolerance && rel_gap <= opts.tolerance {
            status = SdpStatus::Optimal;
            break;
        }
        if stall >= 8 {
            status = SdpStatus::Stalled;
            break;
        }

        let mu = (x.iter().zip(&s).map(|(a, c)| a.dot(c)).sum::<f64>()
            + xs.iter().zip(&ss).map(|(a, c)| a * c).sum::<f64>())
            / nvar;

        let sinv: Vec<Herm2> = s
            .iter()
            .map(|v| v.inverse().ok_or_else(|| SolverError::Numerical("dual slack became singular".into())))
            .collect::<Result<_, _>>()?;

        // Schur complement M_ij = Σ_k Re tr[A_ik X_k A_jk S_k⁻¹] + Σ_s a_is a_js x_s / s_s.
        let sw: Vec<f64> = (0..ns).map(|j| xs[j] / ss[j]).collect();
        let mm = schur_matrix(m, &inc_b, &inc_s, &x, &sinv, &sw);
        let chol = match mm.clone().cholesky() {
            Some(c) => c,
            None => {
                let scale = (0..m).map(|i| mm[(i, i)].abs()).fold(0.0, f64::max).max(1.0);
                let mut reg = mm.clone();
                for i in 0..m {
                    reg[(i, i)] += 1e-13 * scale;
                }
                match reg.cholesky() {
                    Some(c) => c,
                    None => {
                        status = SdpStatus::Stalled;
                        break;
                    }
                }
            }
        };

        let solve_dir = |sigma_mu: f64, corr: Option<&Direction>| -> Direction {
            // Block targets R = σμ S⁻¹ − X − sym(ΔXa ΔSa S⁻¹) and the scalar analogue.
            let rblk: Vec<Herm2> = (0..nb)
                .map(|k| {
                    let mut r = sinv[k] * sigma_mu - x[k];
                    if let Some(c) = corr {
                        r -= sym_product(&c.dx[k], &c.ds[k], &sinv[k]);
                    }
                    r
                })
                .collect();
            let rsc: Vec<f64> = (0..ns)
                .map(|j| {
                    let mut r = sigma_mu / ss[j] - xs[j];
                    if let Some(c) = corr {
                        r -= c.dxs[j] * c.dss[j] / ss[j];
                    }
                    r
                })
                .collect();
            let base: Vec<Herm2> = (0..nb).map(|k| rblk[k] - sym_product(&x[k], &rd[k], &sinv[k])).collect();
            let bases: Vec<f64> = (0..ns).map(|j| rsc[j] - xs[j] * rds[j] / ss[j]).collect();
            let abase = model.apply(&base, &bases);
            let rhs = DVector::from_iterator(m, rp.iter().zip(&abase).map(|(a, c)| a - c));
            let mut dy = chol.solve(&rhs);
            // Refine against the unformed operator: late iterates make the Schur matrix
            // ill-conditioned and the primal residual would otherwise drift.
            for _ in 0..2 {
                let (aty, atys) = model.adjoint(dy.as_slice());
                let mx: Vec<Herm2> = (0..nb).map(|k| sym_product(&x[k], &aty[k], &sinv[k])).collect();
                let mxs: Vec<f64> = (0..ns).map(|j| xs[j] * atys[j] / ss[j]).collect();
                let applied = model.apply(&mx, &mxs);
                let r = DVector::from_iterator(m, rhs.iter().zip(&applied).map(|(a, c)| a - c));
                dy += chol.solve(&r);
            }
            let dy: Vec<f64> = dy.iter().copied().collect();
            let (atdy, atdys) = model.adjoint(&dy);
            let ds: Vec<Herm2> = (0..nb).map(|k| rd[k] - atdy[k]).collect();
            let dss: Vec<f64> = (0..ns).map(|j| rds[j] - atdys[j]).collect();
            let dx: Vec<Herm2> = (0..nb).map(|k| rblk[k] - sym_product(&x[k], &ds[k], &sinv[k])).collect();
            let dxs: Vec<f64> = (0..ns).map(|j| rsc[j] - xs[j] * dss[j] / ss[j]).collect();
            Direction { dx, dxs, dy, ds, dss }
        };

        let steps = |d: &Direction| -> (f64, f64) {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for k in 0..nb {
                ap = ap.min(max_psd_step(&x[k], &d.dx[k], f64::INFINITY));
                ad = ad.min(max_psd_step(&s[k], &d.ds[k], f64::INFINITY));
            }
            for j in 0..ns {
                if d.dxs[j] < 0.0 {
                    ap = ap.min(-xs[j] / d.dxs[j]);
                }
                if d.dss[j] < 0.0 {
                    ad = ad.min(-ss[j] / d.dss[j]);
                }
            }
            (ap, ad)
        };

        let pred = solve_dir(0.0, None);
        let (ap, ad) = steps(&pred);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mu_aff = ((0..nb).map(|k| (x[k] + pred.dx[k] * ap).dot(&(s[k] + pred.ds[k] * ad))).sum::<f64>()
            + (0..ns).map(|j| (xs[j] + pred.dxs[j] * ap) * (ss[j] + pred.dss[j] * ad)).sum::<f64>())
            / nvar;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let dir = solve_dir(sigma * mu, Some(&pred));
        let (ap, ad) = steps(&dir);
        let gamma = 0.9 + 0.09 * (ap.min(ad).min(1.0));
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);

        for k in 0..nb {
            x[k] += dir.dx[k] * ap;
            s[k] += dir.ds[k] * ad;
        }
        for j in 0..ns {
            xs[j] += dir.dxs[j] * ap;
            ss[j] += dir.dss[j] * ad;
        }
        for i in 0..m {
            y[i] += dir.dy[i] * ad;
        }
    }

    if status != SdpStatus::Optimal {
        if let Some((_, bx, bxs, by)) = best {
            x = bx;
            xs = bxs;
            y = by;
        }
    }
    polish_primal(model, &mut x, &mut xs);
    let residuals = model.audit(&x, &xs, &y);
    Ok(SdpSolution { status, blocks: x, scalars: xs, duals: y, residuals, iterations, history })
}

/// ADMM on the dual (Wen–Goldfarb–Yin form) with residual-balanced penalty.
fn admm(model: &SdpModel, opts: &SdpOptions) -> Result<SdpSolution, SolverError> {
    let m = model.constraints.len();
    let nb = model.num_blocks();
    let ns = model.num_scalars();
    let (inc_b, inc_s) = block_incidence(model);
    let b: Vec<f64> = model.constraints.iter().map(|c| c.rhs).collect();

    let mut aat = DMatrix::<f64>::zeros(m, m);
    for k in 0..nb {
        for (i, ai) in &inc_b[k] {
            for (j, aj) in &inc_b[k] {
                aat[(*i, *j)] += ai.dot(aj);
            }
        }
    }
    for j in 0..ns {
        for (i, ai) in &inc_s[j] {
            for (k, ak) in &inc_s[j] {
                aat[(*i, *k)] += ai * ak;
            }
        }
    }
    let chol = aat.cholesky().ok_or_else(|| SolverError::Numerical("A·Aᵀ is not positive definite".into()))?;

    let bnorm = norm_inf(&b);
    let cnorm = model
        .block_costs
        .iter()
        .map(|c| c.max_abs())
        .chain(model.scalar_costs.iter().map(|c| c.abs()))
        .fold(0.0, f64::max);
    let mut x = vec![Herm2::ZERO; nb];
    let mut xs = vec![0.0; ns];
    let mut s = vec![Herm2::ZERO; nb];
    let mut ss = vec![0.0; ns];
    let mut y = vec![0.0; m];
    let mut rho = 1.0;
    let mut history = Vec::new();
    let mut status = SdpStatus::MaxIterations;
    let mut iterations = 0;

    for it in 0..opts.max_iterations {
        iterations = it + 1;
        // y = (AAᵀ)⁻¹ (ρ(b − A x) − A(S − C))
        let ax = model.apply(&x, &xs);
        let sc: Vec<Herm2> = (0..nb).map(|k| s[k] - model.block_costs[k]).collect();
        let scs: Vec<f64> = (0..ns).map(|j| ss[j] - model.scalar_costs[j]).collect();
        let asc = model.apply(&sc, &scs);
        let rhs = DVector::from_iterator(m, (0..m).map(|i| rho * (b[i] - ax[i]) - asc[i]));
        let sol = chol.solve(&rhs);
        y = sol.iter().copied().collect();
        let (aty, atys) = model.adjoint(&y);
        // V = C − A*y − ρX ; S = Π(V) ; X = (S − V)/ρ
        let s_prev = s.clone();
        for k in 0..nb {
            let v = model.block_costs[k] - aty[k] - x[k] * rho;
            s[k] = psd_project_2x2(&v);
            x[k] = (s[k] - v) * (1.0 / rho);
        }
        for j in 0..ns {
            let v = model.scalar_costs[j] - atys[j] - xs[j] * rho;
            ss[j] = v.max(0.0);
            xs[j] = (ss[j] - v) / rho;
        }
        let ax = model.apply(&x, &xs);
        let rel_p = (0..m).map(|i| (b[i] - ax[i]).abs()).fold(0.0, f64::max) / (1.0 + bnorm);
        let rel_d = (0..nb)
            .map(|k| (model.block_costs[k] - aty[k] - s[k]).max_abs())
            .chain((0..ns).map(|j| (model.scalar_costs[j] - atys[j] - ss[j]).abs()))
            .fold(0.0, f64::max)
            / (1.0 + cnorm);
        let pobj = model.block_costs.iter().zip(&x).map(|(c, v)| c.dot(v)).sum::<f64>()
            + model.scalar_costs.iter().zip(&xs).map(|(c, v)| c * v).sum::<f64>();
        let dobj: f64 = b.iter().zip(&y).map(|(bi, yi)| bi * yi).sum();
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        history.push((rel_p, rel_d));
        if rel_p <= opts.tolerance && rel_d <= opts.tolerance && rel_gap <= opts.tolerance {
            status = SdpStatus::Optimal;
            break;
        }
        if it % 50 == 49 {
            let ds = s.iter().zip(&s_prev).map(|(a, c)| (*a - *c).max_abs()).fold(0.0, f64::max);
            if rel_p > 10.0 * rel_d.max(ds) {
                rho *= 2.0;
            } else if rel_d.max(ds) > 10.0 * rel_p {
                rho /= 2.0;
            }
            // Unbounded growth overflows to NaN when one residual stalls.
            rho = rho.clamp(1e-6, 1e6);
        }
    }
    let residuals = model.audit(&x, &xs, &y);
    Ok(SdpSolution { status, blocks: x, scalars: xs, duals: y, residuals, iterations, history })
}
