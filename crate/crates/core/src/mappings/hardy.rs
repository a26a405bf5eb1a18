//! Hardy inequalities for two-setting, two-outcome Bell behaviors and their CHSH consequences.

use super::bell::BellBehavior;
use crate::HybridError;

/// Swaps of the settings and setting-dependent outcome flips (64 elements).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct HardyRelabeling {
    pub swap_x: bool,
    pub swap_y: bool,
    /// Flip Alice's outcome when her (relabeled) setting is `x`.
    pub flip_a: [bool; 2],
    pub flip_b: [bool; 2],
}

impl HardyRelabeling {
    pub fn all() -> Vec<HardyRelabeling> {
        (0..64u8)
            .map(|k| HardyRelabeling {
                swap_x: k & 1 != 0,
                swap_y: k & 2 != 0,
                flip_a: [k & 4 != 0, k & 8 != 0],
                flip_b: [k & 16 != 0, k & 32 != 0],
            })
            .collect()
    }

    /// `p(a,b|x,y)` of the relabeled behavior.
    fn prob(&self, p: &BellBehavior, a: usize, b: usize, x: usize, y: usize) -> f64 {
        let x0 = x ^ self.swap_x as usize;
        let y0 = y ^ self.swap_y as usize;
        p.p(a ^ self.flip_a[x] as usize, b ^ self.flip_b[y] as usize, x0, y0)
    }
}

/// `p(1,0|0,1) + p(0,1|1,0) + p(0,0|0,0) − p(0,0|1,1)` on the relabeled behavior; local
/// behaviors give `≥ 0`.
pub fn hardy_value(p: &BellBehavior, r: &HardyRelabeling) -> Result<f64, HybridError> {
    if p.num_x() != 2 {
        return Err(HybridError::Structural(format!("Hardy inequalities need two settings per party, got |X| = {}", p.num_x())));
    }
    Ok(r.prob(p, 1, 0, 0, 1) + r.prob(p, 0, 1, 1, 0) + r.prob(p, 0, 0, 0, 0) - r.prob(p, 0, 0, 1, 1))
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct HardyCheckReport {
    /// Sum of the canonical Hardy inequality and its all-outcomes-flipped copy.
    pub d0: f64,
    /// `2 − D₀`, the same sum rewritten with `p(a=b) = 1 − p(a≠b)`.
    pub d1: f64,
    /// `S(x,y) = ⟨A_x'B_y⟩ + ⟨A_xB_y'⟩ + ⟨A_x'B_y'⟩ − ⟨A_xB_y⟩`, indexed `2x + y`.
    pub chsh: [f64; 4],
    /// `|D₁ − D₀ − S(0,0)|`; `S(0,0) = ⟨A₀B₁⟩ + ⟨A₁B₀⟩ − ⟨A₀B₀⟩ + ⟨A₁B₁⟩`.
    pub identity_residual: f64,
    pub hardy_min: f64,
    pub max_abs_chsh: f64,
    /// Every Hardy relabeling is `≥ −tol`.
    pub hardy_holds: bool,
    /// Every `|S(x,y)| ≤ 2 + tol`.
    pub chsh_holds: bool,
}

impl HardyCheckReport {
    /// Hardy inequalities imply the CHSH inequalities on this behavior.
    pub fn implication_holds(&self) -> bool {
        !self.hardy_holds || self.chsh_holds
    }
}

pub fn hardy_implies_chsh_check(p: &BellBehavior, tol: f64) -> Result<HardyCheckReport, HybridError> {
    let canonical = hardy_value(p, &HardyRelabeling::default())?;
    let flipped = hardy_value(p, &HardyRelabeling { flip_a: [true; 2], flip_b: [true; 2], ..Default::default() })?;
    let d0 = canonical + flipped;
    let eq = |x: usize, y: usize| p.p(0, 0, x, y) + p.p(1, 1, x, y);
    let ne = |x: usize, y: usize| p.p(0, 1, x, y) + p.p(1, 0, x, y);
    let d1 = eq(0, 1) + eq(1, 0) + ne(0, 0) - ne(1, 1);
    let mut chsh = [0.0; 4];
    for x in 0..2 {
        for y in 0..2 {
            let (xp, yp) = (1 - x, 1 - y);
            chsh[2 * x + y] = p.correlator(xp, y) + p.correlator(x, yp) + p.correlator(xp, yp) - p.correlator(x, y);
        }
    }
    let hardy_min = HardyRelabeling::all().iter().map(|r| hardy_value(p, r)).collect::<Result<Vec<_>, _>>()?.into_iter().fold(f64::INFINITY, f64::min);
    let max_abs_chsh = chsh.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    Ok(HardyCheckReport {
        d0,
        d1,
        chsh,
        identity_residual: (d1 - d0 - chsh[0]).abs(),
        hardy_min,
        max_abs_chsh,
        hardy_holds: hardy_min >= -tol,
        chsh_holds: max_abs_chsh <= 2.0 + tol,
    })
}
