//! Finite detection efficiency: lossy behaviors, thresholds for violating I_l22, and sweeps.
//!
//! An undetected particle is binned into a fixed outcome (`a*` for Alice, `b*` for Bob). Alice's
//! reported outcome is what Bob's device receives, so when Alice misses, Bob measures as after
//! `do(a*)`.

use rayon::prelude::*;

use super::seesaw::{seesaw_from_starts, SeesawOptions};
use super::QuantumInstrumentalModel;
use crate::behavior::ExtendedBehavior;
use crate::polytope::LinearFunctional;
use crate::{Behavior, HybridError};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EfficiencyPoint {
    pub eta1: f64,
    pub eta2: f64,
}

impl EfficiencyPoint {
    pub fn new(eta1: f64, eta2: f64) -> Result<Self, HybridError> {
        if !(0.0..=1.0).contains(&eta1) || !(0.0..=1.0).contains(&eta2) {
            return Err(HybridError::Domain(format!("efficiencies must lie in [0,1], got ({eta1}, {eta2})")));
        }
        Ok(EfficiencyPoint { eta1, eta2 })
    }

    pub fn symmetric(eta: f64) -> Result<Self, HybridError> {
        Self::new(eta, eta)
    }
}

/// Outcomes that absorb no-detection events.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Binning {
    pub a_star: usize,
    pub b_star: usize,
}

impl Default for Binning {
    fn default() -> Self {
        Binning { a_star: 1, b_star: 1 }
    }
}

/// The loss map on raw tables; affine in the entries, with no normalization assumed.
fn noisy_tables(obs: &[[[f64; 2]; 2]], do_: &[[f64; 2]; 2], e: EfficiencyPoint, bin: Binning) -> (Vec<[[f64; 2]; 2]>, [[f64; 2]; 2]) {
    let (e1, e2) = (e.eta1, e.eta2);
    let ind = |c: bool| if c { 1.0 } else { 0.0 };
    let out = obs
        .iter()
        .map(|t| {
            let mut n = [[0.0; 2]; 2];
            for a in 0..2 {
                let pa = t[a][0] + t[a][1];
                for b in 0..2 {
                    n[a][b] = e1 * e2 * t[a][b]
                        + ind(a == bin.a_star) * (1.0 - e1) * e2 * do_[bin.a_star][b]
                        + ind(b == bin.b_star) * e1 * (1.0 - e2) * pa
                        + ind(a == bin.a_star && b == bin.b_star) * (1.0 - e1) * (1.0 - e2);
                }
            }
            n
        })
        .collect();
    let mut d = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            d[a][b] = e2 * do_[a][b] + (1.0 - e2) * ind(b == bin.b_star);
        }
    }
    (out, d)
}

/// Behavior observed with detector efficiencies `e`, losses binned per `bin`.
pub fn noisy_behavior(ideal: &Behavior, e: EfficiencyPoint, bin: Binning) -> Result<Behavior, HybridError> {
    let e = EfficiencyPoint::new(e.eta1, e.eta2)?;
    if bin.a_star > 1 || bin.b_star > 1 {
        return Err(HybridError::Domain(format!("binning outcomes must be 0 or 1, got {bin:?}")));
    }
    let (obs, do_) = noisy_tables(ideal.obs_table(), ideal.do_table(), e, bin);
    ExtendedBehavior::new(obs, do_)
}

/// Functional `G` with `G(p) = f(noisy_behavior(p))`, found by probing the affine loss map.
pub fn noisy_functional(f: &LinearFunctional<f64>, e: EfficiencyPoint, bin: Binning) -> LinearFunctional<f64> {
    let l = f.l();
    let n = 4 * l + 4;
    let eval_at = |v: &[f64]| {
        let mut obs = vec![[[0.0; 2]; 2]; l];
        let mut do_ = [[0.0; 2]; 2];
        for (k, &val) in v.iter().enumerate() {
            if k < 4 * l {
                obs[k / 4][(k / 2) % 2][k % 2] = val;
            } else {
                do_[(k - 4 * l) / 2][k % 2] = val;
            }
        }
        let (o, d) = noisy_tables(&obs, &do_, e, bin);
        let mut g = f.constant;
        for x in 0..l {
            for a in 0..2 {
                for b in 0..2 {
                    g += f.obs[x][a][b] * o[x][a][b];
                }
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                g += f.do_[a][b] * d[a][b];
            }
        }
        g
    };
    let base = eval_at(&vec![0.0; n]);
    let mut coeffs = vec![base];
    for k in 0..n {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        coeffs.push(eval_at(&v) - base);
    }
    LinearFunctional::from_vector(l, &coeffs)
}

/// Smallest I_222 value reachable by qubit models at efficiencies `e` (seesaw upper bound on the
/// quantum minimum), minimized over every relabeled I_222 facet.
pub fn efficiency_value(e: EfficiencyPoint, bin: Binning, opts: &SeesawOptions) -> Result<f64, HybridError> {
    Ok(efficiency_value_from(e, bin, opts, &[])?.0)
}

/// [`efficiency_value`] with per-facet warm starts; also returns the best model per facet.
fn efficiency_value_from(
    e: EfficiencyPoint,
    bin: Binning,
    opts: &SeesawOptions,
    warm: &[QuantumInstrumentalModel],
) -> Result<(f64, Vec<QuantumInstrumentalModel>), HybridError> {
    let e = EfficiencyPoint::new(e.eta1, e.eta2)?;
    let base = LinearFunctional::il22(2, 0, 0, 0, 1)?;
    let mut best = f64::INFINITY;
    let mut models = Vec::new();
    for (k, f) in base.orbit().iter().enumerate() {
        let r = seesaw_from_starts(&noisy_functional(f, e, bin), &warm[k.min(warm.len())..(k + 1).min(warm.len())], opts)?;
        best = best.min(r.value);
        models.push(r.model);
    }
    Ok((best, models))
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EfficiencyMode {
    /// `η1 = η2 = η`.
    Symmetric,
    /// `η1` fixed, search over `η2`.
    FixEta1(f64),
    /// `η2` fixed, search over `η1`.
    FixEta2(f64),
}

impl EfficiencyMode {
    fn point(self, eta: f64) -> Result<EfficiencyPoint, HybridError> {
        match self {
            EfficiencyMode::Symmetric => EfficiencyPoint::new(eta, eta),
            EfficiencyMode::FixEta1(e1) => EfficiencyPoint::new(e1, eta),
            EfficiencyMode::FixEta2(e2) => EfficiencyPoint::new(eta, e2),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdOptions {
    pub seesaw: SeesawOptions,
    pub binning: Binning,
    /// Initial bracket; `high` must admit a violation and `low` must not.
    pub low: f64,
    pub high: f64,
    /// Bisection stops once the bracket is narrower than this.
    pub precision: f64,
    /// A value below `-cutoff` counts as a violation.
    pub cutoff: f64,
}

impl ThresholdOptions {
    /// Bracket `[0.5, 1]` for the symmetric search and `[0.4, 1]` otherwise.
    pub fn for_mode(mode: EfficiencyMode, seed: u64) -> Self {
        let low = match mode {
            EfficiencyMode::Symmetric => 0.5,
            _ => 0.4,
        };
        ThresholdOptions { seesaw: SeesawOptions::with_seed(seed), binning: Binning::default(), low, high: 1.0, precision: 1e-3, cutoff: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ThresholdResult {
    /// Upper end of the final bracket: the smallest tested efficiency with a violation.
    pub eta: f64,
    pub low: f64,
    /// `(η, best value)` for every evaluated point, in evaluation order.
    pub evaluations: Vec<(f64, f64)>,
}

/// Smallest efficiency admitting an I_222 violation below `-cutoff`, by bisection.
///
/// Each evaluation also restarts from the optimal models of the closest violating point seen
/// so far, which follows weakly entangled optima toward the threshold.
pub fn efficiency_threshold(mode: EfficiencyMode, opts: &ThresholdOptions) -> Result<ThresholdResult, HybridError> {
    let mut evaluations = Vec::new();
    let mut warm: Vec<QuantumInstrumentalModel> = Vec::new();
    let mut eval = |eta: f64| -> Result<bool, HybridError> {
        let (v, models) = efficiency_value_from(mode.point(eta)?, opts.binning, &opts.seesaw, &warm)?;
        evaluations.push((eta, v));
        let violated = v < -opts.cutoff;
        if violated {
            warm = models;
        }
        Ok(violated)
    };
    let (mut lo, mut hi) = (opts.low, opts.high);
    if !eval(hi)? {
        return Err(HybridError::Domain(format!("no violation found at the upper bracket end {hi}")));
    }
    if eval(lo)? {
        return Err(HybridError::Domain(format!("violation already at the lower bracket end {lo}")));
    }
    while hi - lo > opts.precision {
        let mid = 0.5 * (lo + hi);
        if eval(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdResult { eta: hi, low: lo, evaluations })
}

/// Required `η2` for each fixed `η1`, computed in parallel; output in input order.
pub fn efficiency_boundary(eta1_values: &[f64], opts: &ThresholdOptions) -> Result<Vec<(f64, f64)>, HybridError> {
    eta1_values
        .par_iter()
        .map(|&e1| efficiency_threshold(EfficiencyMode::FixEta1(e1), opts).map(|r| (e1, r.eta)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepPoint {
    pub eta1: f64,
    pub eta2: f64,
    #[serde(rename = "best_Il22")]
    pub best_il22: f64,
}

/// Best I_222 value on an `n × n` grid over `[0.5, 1]²`, `η1` varying slowest.
pub fn efficiency_sweep(n: usize, bin: Binning, opts: &SeesawOptions) -> Result<Vec<SweepPoint>, HybridError> {
    if n < 2 {
        return Err(HybridError::Domain(format!("sweep grid needs at least 2 points per axis, got {n}")));
    }
    let axis: Vec<f64> = (0..n).map(|i| 0.5 + 0.5 * i as f64 / (n - 1) as f64).collect();
    let points: Vec<(f64, f64)> = axis.iter().flat_map(|&e1| axis.iter().map(move |&e2| (e1, e2))).collect();
    points
        .par_iter()
        .map(|&(eta1, eta2)| {
            let v = efficiency_value(EfficiencyPoint::new(eta1, eta2)?, bin, opts)?;
            Ok(SweepPoint { eta1, eta2, best_il22: v })
        })
        .collect()
}
