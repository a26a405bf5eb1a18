//! Assemblage generators and visibility bisection.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use hybrid_bell_solver::linalg::{c, identity, kron, matrix_to_herm2, partial_trace_first, projector, CMatrix, CVector};
use hybrid_bell_solver::{Herm2, SdpOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::program::{robustness_primal, tripartite_robustness, TripartiteModel};
use super::{assemblage_from_model, Channel, DataRegime, ExtendedAssemblage, TripartiteAssemblage};
use crate::HybridError;

fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// `[(𝟙 + n·σ)/2, (𝟙 − n·σ)/2]` for a unit-norm Pauli combination `n·σ`; outcome 0 is `+1`.
fn sharp_measurement(obs: &CMatrix) -> [CMatrix; 2] {
    let id = identity(2);
    [(&id + obs) * c(0.5, 0.0), (&id - obs) * c(0.5, 0.0)]
}

fn equatorial_measurement(phi: f64) -> [CMatrix; 2] {
    sharp_measurement(&(pauli_x() * c(phi.cos(), 0.0) + pauli_y() * c(phi.sin(), 0.0)))
}

fn check_range(name: &str, v: f64, lo: f64, hi: f64) -> Result<(), HybridError> {
    if !(lo..=hi).contains(&v) {
        return Err(HybridError::Domain(format!("{name} = {v} outside [{lo}, {hi}]")));
    }
    Ok(())
}

fn z_corrections() -> [Channel; 2] {
    [Channel::identity(), Channel::unitary(pauli_z())]
}

/// Remote state preparation on the singlet: Alice measures `{|φ^x_(a)⟩}` with `φ⁰ = 0`,
/// `φ¹ = phi`, and Bob applies `Z^a`.
pub fn rsp_assemblage(phi: f64) -> Result<ExtendedAssemblage, HybridError> {
    check_range("phi", phi, 0.0, 2.0 * std::f64::consts::PI)?;
    let s = FRAC_1_SQRT_2;
    let singlet = CVector::from_vec(vec![c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)]);
    let alice = [0.0, phi].map(|p| {
        [0, 1].map(|a: i32| {
            let sign = if a == 0 { 1.0 } else { -1.0 };
            projector(&CVector::from_vec(vec![c(s, 0.0), c(sign * s * p.cos(), sign * s * p.sin())]))
        })
    });
    assemblage_from_model(&projector(&singlet), &alice, &z_corrections())
}

/// `cos θ|00⟩ + sin θ|11⟩` with Alice measuring `σ_X` (x = 0) and `σ_Y` (x = 1), Bob
/// correcting with `Z^a`.
pub fn rsp_entanglement_assemblage(theta: f64) -> Result<ExtendedAssemblage, HybridError> {
    check_range("theta", theta, 0.0, std::f64::consts::FRAC_PI_2)?;
    let psi = crate::quantum::partially_entangled_state(theta);
    let alice = [sharp_measurement(&pauli_x()), sharp_measurement(&pauli_y())];
    assemblage_from_model(&projector(&psi), &alice, &z_corrections())
}

/// `ρ_v = v|Φ⁺⟩⟨Φ⁺| + (1 − v)(|00⟩⟨00| + |11⟩⟨11|)/2`.
pub fn x3_state(v: f64) -> CMatrix {
    let s = FRAC_1_SQRT_2;
    let phi = CVector::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
    let mut dephased = CMatrix::zeros(4, 4);
    dephased[(0, 0)] = c(0.5, 0.0);
    dephased[(3, 3)] = c(0.5, 0.0);
    projector(&phi) * c(v, 0.0) + dephased * c(1.0 - v, 0.0)
}

/// `ρ_v` with Alice measuring the eigenbases of `−(σ_X + σ_Z)/√2`, `σ_X`, `σ_Z` and identity
/// channels on Bob's side.
pub fn x3_assemblage(v: f64) -> Result<ExtendedAssemblage, HybridError> {
    check_range("v", v, 0.0, 1.0)?;
    let diag = (pauli_x() + pauli_z()) * c(-FRAC_1_SQRT_2, 0.0);
    let alice = [sharp_measurement(&diag), sharp_measurement(&pauli_x()), sharp_measurement(&pauli_z())];
    assemblage_from_model(&x3_state(v), &alice, &[Channel::identity(), Channel::identity()])
}

/// `|G₃⟩ = (|+0+⟩ + |−1−⟩)/√2`.
pub fn graph_state() -> CVector {
    let s = FRAC_1_SQRT_2;
    let plus = CVector::from_vec(vec![c(s, 0.0), c(s, 0.0)]);
    let minus = CVector::from_vec(vec![c(s, 0.0), c(-s, 0.0)]);
    let zero = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
    let one = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
    (plus.kronecker(&zero).kronecker(&plus) + minus.kronecker(&one).kronecker(&minus)) * c(s, 0.0)
}

/// `v|G₃⟩⟨G₃| + (1 − v)𝟙/8`. Alice measures `σ_X` or `σ_Y`; Bob measures the equatorial
/// observable at angle `±π/4` (y = 0) or `±3π/4` (y = 1), the sign set by Alice's outcome.
/// Charlie is trusted and receives the identity channel, so an intervention on `B` leaves his
/// state conditioned on `(a, x)` only.
pub fn tripartite_assemblage(v: f64) -> Result<TripartiteAssemblage, HybridError> {
    check_range("v", v, 0.0, 1.0)?;
    let g = graph_state();
    let rho = projector(&g) * c(v, 0.0) + identity(8) * c((1.0 - v) / 8.0, 0.0);
    let alice = [sharp_measurement(&pauli_x()), sharp_measurement(&pauli_y())];
    let id = identity(2);
    let reduce = |op: &CMatrix| -> Herm2 { matrix_to_herm2(&partial_trace_first(&(op * &rho), 4, 2)) };
    let mut obs = [[[[Herm2::ZERO; 2]; 2]; 2]; 2];
    let mut do_ = [[[Herm2::ZERO; 2]; 2]; 2];
    for x in 0..2 {
        for a in 0..2 {
            for y in 0..2 {
                let base = if y == 0 { FRAC_PI_4 } else { 3.0 * FRAC_PI_4 };
                let angle = if a == 0 { base } else { -base };
                let bob = equatorial_measurement(angle);
                for b in 0..2 {
                    obs[x][y][a][b] = reduce(&kron(&kron(&alice[x][a], &bob[b]), &id));
                }
            }
            let marginal = reduce(&kron(&kron(&alice[x][a], &id), &id));
            do_[x][a] = [marginal, marginal];
        }
    }
    let e = TripartiteAssemblage { obs, do_ };
    e.validate()?;
    Ok(e)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteeringScenario {
    X3,
    Tripartite,
}

#[derive(Clone, Debug)]
pub struct VisibilityOptions {
    /// `τ` above this counts as nonclassical.
    pub threshold: f64,
    pub precision: f64,
    /// Interior points evaluated in parallel per round.
    pub points_per_round: usize,
    pub sdp: SdpOptions,
}

impl Default for VisibilityOptions {
    fn default() -> Self {
        VisibilityOptions { threshold: 1e-7, precision: 1e-4, points_per_round: 7, sdp: SdpOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalVisibility {
    /// Smallest visibility found with `τ` above the threshold.
    pub visibility: f64,
    /// Largest visibility found classical.
    pub classical_below: f64,
    pub evaluations: usize,
}

/// Bisects `[0, 1]` for the onset of `oracle(v) > threshold`, evaluating several interior
/// points per round in parallel.
pub fn bisect_visibility<F>(oracle: F, opts: &VisibilityOptions) -> Result<CriticalVisibility, HybridError>
where
    F: Fn(f64) -> Result<f64, HybridError> + Sync,
{
    let thr = opts.threshold;
    let ends = [0.0, 1.0].par_iter().map(|&v| oracle(v)).collect::<Result<Vec<_>, _>>()?;
    if ends[0] > thr || ends[1] <= thr {
        return Err(HybridError::Domain(format!(
            "bisection bracket fails: tau(0) = {:.3e}, tau(1) = {:.3e}",
            ends[0], ends[1]
        )));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut evaluations = 2;
    let k = opts.points_per_round.max(1);
    while hi - lo > opts.precision {
        let pts: Vec<f64> = (1..=k).map(|i| lo + (hi - lo) * i as f64 / (k + 1) as f64).collect();
        let taus = pts.par_iter().map(|&v| oracle(v)).collect::<Result<Vec<_>, _>>()?;
        evaluations += k;
        // Nonclassicality is monotone in v; take the first point above threshold.
        match taus.iter().position(|&t| t > thr) {
            Some(0) => hi = pts[0],
            Some(i) => {
                lo = pts[i - 1];
                hi = pts[i];
            }
            None => lo = pts[k - 1],
        }
    }
    Ok(CriticalVisibility { visibility: hi, classical_below: lo, evaluations })
}

/// Critical visibility of the x3 or tripartite scenario under the given data regime.
pub fn critical_visibility(
    scenario: SteeringScenario,
    regime: DataRegime,
    opts: &VisibilityOptions,
) -> Result<CriticalVisibility, HybridError> {
    match scenario {
        SteeringScenario::X3 => {
            bisect_visibility(|v| Ok(robustness_primal(&x3_assemblage(v)?, regime, &opts.sdp)?.tau), opts)
        }
        SteeringScenario::Tripartite => bisect_visibility(
            |v| {
                let e = tripartite_assemblage(v)?;
                Ok(tripartite_robustness(&e, regime, TripartiteModel::Communicating, &opts.sdp)?.tau)
            },
            opts,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steering::{standard_steering_robustness, witness_dual};

    fn sdp() -> SdpOptions {
        SdpOptions::default()
    }

    #[test]
    fn x3_assemblage_at_full_visibility() {
        let e = x3_assemblage(1.0).unwrap();
        // Φ⁺ with Alice's σ_Z outcome 0 leaves Bob in |0⟩ with weight 1/2.
        assert!((e.obs[2][0].a - 0.5).abs() < 1e-12 && e.obs[2][0].d.abs() < 1e-12);
        assert!((e.do_[0].a - 0.5).abs() < 1e-12 && e.do_[0].re.abs() < 1e-12);
        let r = robustness_primal(&e, DataRegime::Interventional, &sdp()).unwrap();
        assert!(r.tau > 0.2, "tau = {}", r.tau);
        let (w, value) = witness_dual(&e, DataRegime::Interventional, &sdp()).unwrap();
        assert!((value - r.tau).abs() < 1e-6);
        let total = e.observational_value(&w) + e.interventional_value(&w);
        assert!((total - value).abs() < 1e-6);
    }

    #[test]
    fn rsp_robustness_shape() {
        let at = |phi: f64| robustness_primal(&rsp_assemblage(phi).unwrap(), DataRegime::Interventional, &sdp()).unwrap().tau;
        assert!(at(0.0) <= 1e-7);
        assert!(at(std::f64::consts::FRAC_PI_2) > at(FRAC_PI_4));
        let product = rsp_entanglement_assemblage(0.0).unwrap();
        assert!(robustness_primal(&product, DataRegime::Interventional, &sdp()).unwrap().tau <= 1e-7);
    }

    #[test]
    fn standard_steering_of_x3() {
        let e = x3_assemblage(1.0).unwrap();
        assert!(standard_steering_robustness(&e, &sdp()).unwrap().tau > 0.1);
        let classical = x3_assemblage(0.0).unwrap();
        assert!(standard_steering_robustness(&classical, &sdp()).unwrap().tau <= 1e-7);
    }

    #[test]
    fn tripartite_is_nonclassical_at_full_visibility() {
        let e = tripartite_assemblage(1.0).unwrap();
        for regime in [DataRegime::Observational, DataRegime::Interventional] {
            let r = tripartite_robustness(&e, regime, TripartiteModel::Communicating, &sdp()).unwrap();
            assert!(r.tau > 1e-3, "{regime:?}: {}", r.tau);
        }
    }

    #[test]
    fn out_of_range_parameters() {
        assert!(matches!(x3_assemblage(1.5), Err(HybridError::Domain(_))));
        assert!(rsp_entanglement_assemblage(-0.1).is_err());
        assert!(tripartite_assemblage(-1.0).is_err());
    }
}
