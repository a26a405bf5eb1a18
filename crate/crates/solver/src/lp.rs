//! Dense two-phase simplex with Bland's rule, generic over [`Scalar`].
//!
//! The problem is `min c·x` subject to `A_eq x = b_eq`, `A_ub x ≤ b_ub` and per-variable bounds.
//! Results carry dual multipliers, an infeasibility (Farkas) certificate or an unbounded ray.

use crate::scalar::Scalar;
use crate::SolverError;

/// Bounds of a single variable; `None` means infinite.
#[derive(Clone, Debug, PartialEq)]
pub struct VarBounds<T> {
    pub lower: Option<T>,
    pub upper: Option<T>,
}

impl<T: Scalar> VarBounds<T> {
    pub fn nonneg() -> Self {
        VarBounds { lower: Some(T::zero()), upper: None }
    }

    pub fn free() -> Self {
        VarBounds { lower: None, upper: None }
    }
}

#[derive(Clone, Debug)]
pub struct LpProblem<T> {
    pub objective: Vec<T>,
    pub eq_rows: Vec<Vec<T>>,
    pub eq_rhs: Vec<T>,
    pub ub_rows: Vec<Vec<T>>,
    pub ub_rhs: Vec<T>,
    pub bounds: Vec<VarBounds<T>>,
}

impl<T: Scalar> LpProblem<T> {
    /// `n` nonnegative variables, zero objective, no constraints.
    pub fn new(n: usize) -> Self {
        LpProblem {
            objective: vec![T::zero(); n],
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            ub_rows: Vec::new(),
            ub_rhs: Vec::new(),
            bounds: vec![VarBounds::nonneg(); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn minimize(mut self, c: Vec<T>) -> Self {
        self.objective = c;
        self
    }

    pub fn add_eq(&mut self, row: Vec<T>, rhs: T) {
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn add_le(&mut self, row: Vec<T>, rhs: T) {
        self.ub_rows.push(row);
        self.ub_rhs.push(rhs);
    }

    pub fn add_ge(&mut self, row: Vec<T>, rhs: T) {
        self.add_le(row.into_iter().map(|v| -v).collect(), -rhs);
    }

    pub fn set_bounds(&mut self, j: usize, lower: Option<T>, upper: Option<T>) {
        self.bounds[j] = VarBounds { lower, upper };
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let n = self.num_vars();
        let bad_row = |rows: &[Vec<T>]| rows.iter().any(|r| r.len() != n);
        if bad_row(&self.eq_rows)
            || bad_row(&self.ub_rows)
            || self.eq_rows.len() != self.eq_rhs.len()
            || self.ub_rows.len() != self.ub_rhs.len()
            || self.bounds.len() != n
        {
            return Err(SolverError::Dimension("LP rows, right-hand sides and bounds must agree".into()));
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if let (Some(l), Some(u)) = (&b.lower, &b.upper) {
                if l > u {
                    return Err(SolverError::Dimension(format!("variable {j} has lower bound above upper bound")));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[T]) -> T {
        dot(&self.objective, x)
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[T]) -> T {
        let mut worst = T::zero();
        let mut upd = |v: T| {
            if v > worst {
                worst = v;
            }
        };
        for (r, b) in self.eq_rows.iter().zip(&self.eq_rhs) {
            upd((dot(r, x) - b.clone()).abs());
        }
        for (r, b) in self.ub_rows.iter().zip(&self.ub_rhs) {
            upd(dot(r, x) - b.clone());
        }
        for (xj, b) in x.iter().zip(&self.bounds) {
            if let Some(l) = &b.lower {
                upd(l.clone() - xj.clone());
            }
            if let Some(u) = &b.upper {
                upd(xj.clone() - u.clone());
            }
        }
        worst
    }
}

/// Optimal primal/dual pair.
///
/// Sign convention: with `g = c − A_eqᵀ·eq − A_ubᵀ·ub`, the duals satisfy `ub ≤ 0`,
/// `g_j ≥ 0` at a lower bound and `g_j ≤ 0` at an upper bound.
#[derive(Clone, Debug)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
    pub eq_duals: Vec<T>,
    pub ub_duals: Vec<T>,
    pub reduced_costs: Vec<T>,
    pub dual_objective: T,
    /// Largest complementary-slackness product, which vanishes at an exact optimum.
    pub complementarity: T,
}

/// Multipliers proving infeasibility.
///
/// With `g = A_eqᵀ·eq + A_ubᵀ·ub` and `ub ≥ 0`, every feasible `x` satisfies
/// `g·x ≤ eq·b_eq + ub·b_ub`; the certificate shows the minimum of `g·x` over the bound box
/// exceeds that right-hand side.
#[derive(Clone, Debug)]
pub struct FarkasCertificate<T> {
    pub eq: Vec<T>,
    pub ub: Vec<T>,
}

impl<T: Scalar> FarkasCertificate<T> {
    /// Returns `min_box g·x − (eq·b_eq + ub·b_ub)`, positive when the certificate is valid,
    /// or `None` if the minimum is unbounded or a multiplier has the wrong sign.
    pub fn margin(&self, p: &LpProblem<T>) -> Option<T> {
        if self.ub.iter().any(|u| u.is_neg()) {
            return None;
        }
        let n = p.num_vars();
        let mut g = vec![T::zero(); n];
        let mut rhs = T::zero();
        for (i, y) in self.eq.iter().enumerate() {
            axpy(&mut g, y, &p.eq_rows[i]);
            rhs += y.clone() * p.eq_rhs[i].clone();
        }
        for (i, y) in self.ub.iter().enumerate() {
            axpy(&mut g, y, &p.ub_rows[i]);
            rhs += y.clone() * p.ub_rhs[i].clone();
        }
        let mut lo = T::zero();
        for (gj, b) in g.iter().zip(&p.bounds) {
            if gj.is_pos() {
                lo += gj.clone() * b.lower.clone()?;
            } else if gj.is_neg() {
                lo += gj.clone() * b.upper.clone()?;
            }
        }
        Some(lo - rhs)
    }
}

#[derive(Clone, Debug)]
pub enum LpOutcome<T> {
    Optimal(LpSolution<T>),
    Infeasible(FarkasCertificate<T>),
    /// A feasible point and a direction along which the objective decreases without bound.
    Unbounded { point: Vec<T>, ray: Vec<T> },
}

impl<T> LpOutcome<T> {
    pub fn optimal(self) -> Option<LpSolution<T>> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn axpy<T: Scalar>(acc: &mut [T], s: &T, row: &[T]) {
    if s.is_zero() {
        return;
    }
    for (a, r) in acc.iter_mut().zip(row) {
        if !r.is_zero() {
            *a += s.clone() * r.clone();
        }
    }
}

/// How an original variable is expressed through standard-form columns.
#[derive(Clone, Debug)]
enum VarMap<T> {
    /// `x = offset + col`
    Shifted { col: usize, offset: T },
    /// `x = offset − col`
    Mirrored { col: usize, offset: T },
    /// `x = pos − neg`
    Split { pos: usize, neg: usize },
}

#[derive(Clone, Copy, Debug)]
enum RowOrigin {
    Eq(usize),
    Ub(usize),
    Upper,
}

struct StandardForm<T> {
    a: Vec<Vec<T>>,
    b: Vec<T>,
    c: Vec<T>,
    origin: Vec<RowOrigin>,
    /// Multiplier applied to the original row (±1).
    row_sign: Vec<T>,
    map: Vec<VarMap<T>>,
}

fn standardize<T: Scalar>(p: &LpProblem<T>) -> StandardForm<T> {
    let n = p.num_vars();
    let mut map = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut upper_rows = Vec::new();
    for b in &p.bounds {
        match (&b.lower, &b.upper) {
            (Some(l), up) => {
                map.push(VarMap::Shifted { col: ncols, offset: l.clone() });
                if let Some(u) = up {
                    upper_rows.push((ncols, u.clone() - l.clone()));
                }
                ncols += 1;
            }
            (None, Some(u)) => {
                map.push(VarMap::Mirrored { col: ncols, offset: u.clone() });
                ncols += 1;
            }
            (None, None) => {
                map.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
                ncols += 2;
            }
        }
    }

    let mut c = vec![T::zero(); ncols];
    for (j, m) in map.iter().enumerate() {
        let cj = p.objective[j].clone();
        match m {
            VarMap::Shifted { col, .. } => {
                c[*col] += cj;
            }
            VarMap::Mirrored { col, .. } => {
                c[*col] -= cj;
            }
            VarMap::Split { pos, neg } => {
                c[*pos] += cj.clone();
                c[*neg] -= cj;
            }
        }
    }

    let substitute = |row: &[T], rhs: &T| -> (Vec<T>, T) {
        let mut out = vec![T::zero(); ncols];
        let mut r = rhs.clone();
        for (j, m) in map.iter().enumerate() {
            let v = &row[j];
            if v.is_zero() {
                continue;
            }
            match m {
                VarMap::Shifted { col, offset } => {
                    out[*col] += v.clone();
                    r -= v.clone() * offset.clone();
                }
                VarMap::Mirrored { col, offset } => {
                    out[*col] -= v.clone();
                    r -= v.clone() * offset.clone();
                }
                VarMap::Split { pos, neg } => {
                    out[*pos] += v.clone();
                    out[*neg] -= v.clone();
                }
            }
        }
        (out, r)
    };

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut origin = Vec::new();
    let mut needs_slack = Vec::new();
    for (i, (row, b)) in p.eq_rows.iter().zip(&p.eq_rhs).enumerate() {
        let (r, v) = substitute(row, b);
        rows.push(r);
        rhs.push(v);
        origin.push(RowOrigin::Eq(i));
        needs_slack.push(false);
    }
    for (i, (row, b)) in p.ub_rows.iter().zip(&p.ub_rhs).enumerate() {
        let (r, v) = substitute(row, b);
        rows.push(r);
        rhs.push(v);
        origin.push(RowOrigin::Ub(i));
        needs_slack.push(true);
    }
    for (col, width) in upper_rows {
        let mut r = vec![T::zero(); ncols];
        r[col] = T::one();
        rows.push(r);
        rhs.push(width);
        origin.push(RowOrigin::Upper);
        needs_slack.push(true);
    }

    let nslack = needs_slack.iter().filter(|s| **s).count();
    let total = ncols + nslack;
    let mut next = ncols;
    for (r, s) in rows.iter_mut().zip(&needs_slack) {
        r.resize(total, T::zero());
        if *s {
            r[next] = T::one();
            next += 1;
        }
    }
    c.resize(total, T::zero());

    let mut row_sign = Vec::with_capacity(rows.len());
    for (r, b) in rows.iter_mut().zip(rhs.iter_mut()) {
        if *b < T::zero() {
            for v in r.iter_mut() {
                *v = -v.clone();
            }
            *b = -b.clone();
            row_sign.push(-T::one());
        } else {
            row_sign.push(T::one());
        }
    }

    StandardForm { a: rows, b: rhs, c, origin, row_sign, map }
}

/// Simplex tableau over `[structural | artificial]` columns plus a right-hand side column.
struct Tableau<T> {
    rows: Vec<Vec<T>>,
    obj: Vec<T>,
    basis: Vec<usize>,
    /// Columns that may enter the basis.
    allowed: Vec<bool>,
}

enum PivotResult {
    Optimal,
    Unbounded(usize),
}

const MAX_PIVOTS: usize = 1_000_000;

impl<T: Scalar> Tableau<T> {
    fn width(&self) -> usize {
        self.allowed.len()
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let w = self.width();
        let piv = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() / piv.clone();
            }
        }
        let prow = self.rows[r].clone();
        let nz: Vec<usize> = (0..=w).filter(|&k| !prow[k].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col].clone();
            if f.is_zero() {
                continue;
            }
            for &k in &nz {
                row[k] -= f.clone() * prow[k].clone();
            }
            row[col] = T::zero();
        }
        let f = self.obj[col].clone();
        if !f.is_zero() {
            for &k in &nz {
                self.obj[k] -= f.clone() * prow[k].clone();
            }
            self.obj[col] = T::zero();
        }
        self.basis[r] = col;
    }

    /// Runs Bland's rule to optimality on the current objective row.
    fn run(&mut self) -> Result<PivotResult, SolverError> {
        let w = self.width();
        for _ in 0..MAX_PIVOTS {
            let entering = (0..w).find(|&j| self.allowed[j] && self.obj[j].is_neg());
            let Some(col) = entering else {
                return Ok(PivotResult::Optimal);
            };
            let mut best: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = &row[col];
                if !a.is_pos() {
                    continue;
                }
                let ratio = row[w].clone() / a.clone();
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let diff = ratio.clone() - br.clone();
                        if diff.is_neg() || (diff.near_zero() && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match best {
                None => return Ok(PivotResult::Unbounded(col)),
                Some((r, _)) => self.pivot(r, col),
            }
        }
        Err(SolverError::CyclingGuard(MAX_PIVOTS))
    }

    fn set_objective(&mut self, costs: &[T]) {
        let w = self.width();
        let mut obj = costs.to_vec();
        obj.push(T::zero());
        for (i, row) in self.rows.iter().enumerate() {
            let cb = costs[self.basis[i]].clone();
            if cb.is_zero() {
                continue;
            }
            for k in 0..=w {
                if !row[k].is_zero() {
                    obj[k] -= cb.clone() * row[k].clone();
                }
            }
        }
        self.obj = obj;
    }

    fn point(&self) -> Vec<T> {
        let w = self.width();
        let mut x = vec![T::zero(); w];
        for (i, &b) in self.basis.iter().enumerate() {
            x[b] = self.rows[i][w].clone();
        }
        x
    }
}

/// Solves the LP. See [`LpOutcome`] for the possible results.
pub fn lp_solve<T: Scalar>(p: &LpProblem<T>) -> Result<LpOutcome<T>, SolverError> {
    p.validate()?;
    let sf = standardize(p);
    let m = sf.a.len();
    let ns = sf.c.len();

    // Phase 1: minimize the sum of artificials.
    let w = ns + m;
    let mut rows = Vec::with_capacity(m);
    for (i, r) in sf.a.iter().enumerate() {
        let mut row = r.clone();
        row.resize(w + 1, T::zero());
        row[ns + i] = T::one();
        row[w] = sf.b[i].clone();
        rows.push(row);
    }
    let mut tab = Tableau { rows, obj: Vec::new(), basis: (ns..ns + m).collect(), allowed: vec![true; w] };
    let mut c1 = vec![T::zero(); w];
    for v in c1.iter_mut().skip(ns) {
        *v = T::one();
    }
    tab.set_objective(&c1);
    if let PivotResult::Unbounded(_) = tab.run()? {
        return Err(SolverError::Numerical("phase one reported an unbounded ray".into()));
    }
    let infeas = -tab.obj[w].clone();
    if infeas.is_pos() {
        // Reduced cost of artificial i is 1 − yᵢ.
        let y: Vec<T> = (0..m).map(|i| T::one() - tab.obj[ns + i].clone()).collect();
        return Ok(LpOutcome::Infeasible(farkas_from_standard(p, &sf, &y)));
    }

    // Drive zero-level artificials out of the basis; rows that cannot pivot are redundant.
    let mut keep = vec![true; m];
    for r in 0..m {
        if tab.basis[r] < ns {
            continue;
        }
        if let Some(col) = (0..ns).find(|&j| !tab.rows[r][j].near_zero()) {
            tab.pivot(r, col);
        } else {
            keep[r] = false;
        }
    }
    for j in ns..w {
        tab.allowed[j] = false;
    }

    let mut c2 = sf.c.clone();
    c2.resize(w, T::zero());
    tab.set_objective(&c2);
    let outcome = tab.run()?;
    let xs = tab.point();

    if let PivotResult::Unbounded(col) = outcome {
        let mut dir = vec![T::zero(); ns];
        dir[col] = T::one();
        for (i, &b) in tab.basis.iter().enumerate() {
            if b < ns {
                dir[b] = -tab.rows[i][col].clone();
            }
        }
        let point = to_original(&sf, &xs[..ns], false);
        let ray = to_original(&sf, &dir, true);
        return Ok(LpOutcome::Unbounded { point, ray });
    }

    // Artificial i has zero cost, so its reduced cost is −yᵢ.
    let y: Vec<T> = (0..m).map(|i| if keep[i] { -tab.obj[ns + i].clone() } else { T::zero() }).collect();
    let x = to_original(&sf, &xs[..ns], false);
    let objective = p.objective_value(&x);

    let mut eq_duals = vec![T::zero(); p.eq_rows.len()];
    let mut ub_duals = vec![T::zero(); p.ub_rows.len()];
    for (i, o) in sf.origin.iter().enumerate() {
        let v = y[i].clone() * sf.row_sign[i].clone();
        match *o {
            RowOrigin::Eq(k) => eq_duals[k] = v,
            RowOrigin::Ub(k) => ub_duals[k] = v,
            RowOrigin::Upper => {}
        }
    }
    let mut reduced = p.objective.clone();
    for (k, yk) in eq_duals.iter().enumerate() {
        axpy(&mut reduced, &-yk.clone(), &p.eq_rows[k]);
    }
    for (k, yk) in ub_duals.iter().enumerate() {
        axpy(&mut reduced, &-yk.clone(), &p.ub_rows[k]);
    }
    let dual_objective = dual_value(p, &eq_duals, &ub_duals, &reduced);

    let mut comp = T::zero();
    let mut upd = |v: T| {
        let v = v.abs();
        if v > comp {
            comp = v;
        }
    };
    for (k, yk) in ub_duals.iter().enumerate() {
        upd(yk.clone() * (p.ub_rhs[k].clone() - dot(&p.ub_rows[k], &x)));
    }
    for (j, g) in reduced.iter().enumerate() {
        let b = &p.bounds[j];
        let gap_lo = b.lower.as_ref().map(|l| x[j].clone() - l.clone());
        let gap_up = b.upper.as_ref().map(|u| u.clone() - x[j].clone());
        let prod = match (gap_lo, gap_up) {
            (Some(lo), Some(up)) => {
                if g.is_pos() {
                    g.clone() * lo
                } else {
                    g.clone() * up
                }
            }
            (Some(lo), None) => g.clone() * lo,
            (None, Some(up)) => g.clone() * up,
            (None, None) => g.clone(),
        };
        upd(prod);
    }
    Ok(LpOutcome::Optimal(LpSolution {
        x,
        objective,
        eq_duals,
        ub_duals,
        reduced_costs: reduced,
        dual_objective,
        complementarity: comp,
    }))
}

fn dual_value<T: Scalar>(p: &LpProblem<T>, eq: &[T], ub: &[T], reduced: &[T]) -> T {
    let mut v = dot(eq, &p.eq_rhs) + dot(ub, &p.ub_rhs);
    for (g, b) in reduced.iter().zip(&p.bounds) {
        if g.is_pos() {
            if let Some(l) = &b.lower {
                v += g.clone() * l.clone();
            }
        } else if g.is_neg() {
            if let Some(u) = &b.upper {
                v += g.clone() * u.clone();
            }
        }
    }
    v
}

fn to_original<T: Scalar>(sf: &StandardForm<T>, xs: &[T], direction: bool) -> Vec<T> {
    sf.map
        .iter()
        .map(|m| match m {
            VarMap::Shifted { col, offset } => {
                if direction {
                    xs[*col].clone()
                } else {
                    offset.clone() + xs[*col].clone()
                }
            }
            VarMap::Mirrored { col, offset } => {
                if direction {
                    -xs[*col].clone()
                } else {
                    offset.clone() - xs[*col].clone()
                }
            }
            VarMap::Split { pos, neg } => xs[*pos].clone() - xs[*neg].clone(),
        })
        .collect()
}

fn farkas_from_standard<T: Scalar>(p: &LpProblem<T>, sf: &StandardForm<T>, y: &[T]) -> FarkasCertificate<T> {
    // Standard form certificate: A'ᵀy ≤ 0, b'ᵀy > 0. Original multipliers are −sign·y.
    let mut eq = vec![T::zero(); p.eq_rows.len()];
    let mut ub = vec![T::zero(); p.ub_rows.len()];
    for (i, o) in sf.origin.iter().enumerate() {
        let v = -(y[i].clone() * sf.row_sign[i].clone());
        match *o {
            RowOrigin::Eq(k) => eq[k] = v,
            RowOrigin::Ub(k) => ub[k] = v,
            RowOrigin::Upper => {}
        }
    }
    FarkasCertificate { eq, ub }
}
