//! Acceptance checks, one line per criterion.
//!
//! Prints PASS/FAIL with the measured values, pinned tolerances and runtimes, then a summary.
//! Exits 0 unless `ACCEPTANCE_STRICT=1` is set, so that known failures stay visible without
//! stopping the rest of the test run.

use std::path::Path;
use std::time::{Duration, Instant};

use hybrid_bell::io::read_json;
use hybrid_bell::mappings::{
    bell_dag, bell_joint, bell_to_instrumental, exo_map_g, exogenize, hardy_implies_chsh_check, hardy_value,
    instrumental_dag, instrumental_from_exo, instrumental_to_bell, BellBehavior, HardyRelabeling,
};
use hybrid_bell::polytope::{
    enumerate_facets, il22_min, membership_constructive, membership_lp, trivial_min, FacetClass, LinearFunctional,
};
use hybrid_bell::quantum::{
    born_behavior, efficiency_threshold, max_violation_model, seesaw_optimize, EfficiencyMode, SeesawOptions,
    ThresholdOptions,
};
use hybrid_bell::sampling::{
    random_behavior, random_classical_assemblage, random_quantum_assemblage, random_quantum_behavior,
    random_trivial_class_behavior, rng, simplex_point,
};
use hybrid_bell::steering::{
    critical_visibility, robustness_primal, steering_sdp_options, verify_witness, x3_assemblage, DataRegime,
    SteeringScenario, SteeringWitness, VisibilityOptions,
};
use hybrid_bell::{Behavior, DeterministicStrategy, HybridError, Scenario};
use rand::Rng;

type Outcome = Result<(bool, String), HybridError>;

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

const QUANTUM_BOUND: f64 = -(std::f64::consts::SQRT_2 - 1.0) / 2.0;

fn max_violation() -> Outcome {
    let v = il22_min(&born_behavior(&max_violation_model())?).0;
    Ok((within(v, QUANTUM_BOUND, 1e-9), format!("min I_222 = {v:.12} (target {QUANTUM_BOUND:.12} ± 1e-9)")))
}

fn seesaw_bound() -> Outcome {
    let f = LinearFunctional::il22(2, 0, 0, 0, 1)?;
    let r = seesaw_optimize(&f, &SeesawOptions { restarts: 20, ..SeesawOptions::with_seed(2024) })?;
    Ok((r.value <= -0.2070, format!("best of 20 restarts = {:.6} (need ≤ -0.2070)", r.value)))
}

/// Membership test inputs on both sides of the boundary: unconstrained, noisy quantum and
/// classical behaviors.
fn membership_sample(seed: u64) -> Result<Behavior, HybridError> {
    let mut r = rng(seed);
    let p = match seed % 3 {
        0 => random_behavior(2, &mut r)?,
        1 => random_quantum_behavior(2, &mut r)?,
        _ => random_trivial_class_behavior(2, &mut r)?,
    };
    let u = Behavior::uniform(2)?;
    let v: f64 = r.gen_range(0.3..1.0);
    Behavior::mixture(&[(v, &p), (1.0 - v, &u)])
}

fn completeness() -> Outcome {
    let report = enumerate_facets(Scenario::new(2)?)?;
    report.verify().map_err(HybridError::Domain)?;
    let mut classes: Vec<FacetClass> = report.nontrivial_orbits().map(|o| o.class).collect();
    classes.sort();
    let orbits_ok = classes == [FacetClass::Trivial, FacetClass::Il22];
    let mut disagreements = 0;
    let mut members = 0;
    for seed in 0..1000 {
        let b = membership_sample(seed)?;
        let lp = membership_lp(&b)?.is_member();
        members += lp as usize;
        if lp != membership_constructive(&b)?.is_feasible() {
            disagreements += 1;
        }
    }
    Ok((
        orbits_ok && disagreements == 0,
        format!(
            "{} facets, non-positivity orbits {classes:?}; LP vs constructive: {disagreements} disagreements on 1000 ({members} members)",
            report.facets.len()
        ),
    ))
}

fn detection_thresholds() -> Outcome {
    let sym = efficiency_threshold(EfficiencyMode::Symmetric, &ThresholdOptions::for_mode(EfficiencyMode::Symmetric, 1))?;
    let mode = EfficiencyMode::FixEta1(1.0);
    let asym = efficiency_threshold(mode, &ThresholdOptions::for_mode(mode, 1))?;
    Ok((
        within(sym.eta, 0.667, 0.01) && within(asym.eta, 0.500, 0.01),
        format!("symmetric {:.4} (target 0.667 ± 0.01), asymmetric {:.4} (target 0.500 ± 0.01)", sym.eta, asym.eta),
    ))
}

fn random_bell_table(seed: u64) -> Result<BellBehavior, HybridError> {
    let mut r = rng(seed);
    let p = (0..2)
        .map(|_| {
            let mut t = [[[0.0; 2]; 2]; 2];
            for row in &mut t {
                let s = simplex_point(4, &mut r);
                *row = [[s[0], s[1]], [s[2], s[3]]];
            }
            t
        })
        .collect();
    BellBehavior::new(p)
}

fn hardy_chsh() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..10_000 {
        worst = worst.max(hardy_implies_chsh_check(&random_bell_table(seed)?, 1e-12)?.identity_residual);
    }
    let mut locals_ok = true;
    for f in 0..4u8 {
        for g in 0..4u8 {
            let p = BellBehavior::local_deterministic(&[f & 1, f >> 1], [g & 1, g >> 1]);
            let rep = hardy_implies_chsh_check(&p, 1e-12)?;
            let hardy_all = HardyRelabeling::all().iter().map(|r| hardy_value(&p, r)).collect::<Result<Vec<_>, _>>()?;
            locals_ok &= hardy_all.iter().all(|v| *v >= -1e-12) && rep.max_abs_chsh <= 2.0 + 1e-12;
        }
    }
    Ok((
        worst <= 1e-12 && locals_ok,
        format!("identity residual max {worst:.1e} over 10000 (≤ 1e-12); 16 local vertices satisfy Hardy and CHSH: {locals_ok}"),
    ))
}

fn bijection() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..1000 {
        let b = random_trivial_class_behavior(2 + (seed % 3) as usize, &mut rng(seed))?;
        worst = worst.max(bell_to_instrumental(&instrumental_to_bell(&b)?)?.max_abs_diff(&b));
    }
    Ok((worst <= 1e-12, format!("round trip max deviation {worst:.1e} over 1000 (≤ 1e-12)")))
}

fn exogenization() -> Outcome {
    let iso = exogenize(&instrumental_dag(), &["A"])?.is_isomorphic(&bell_dag());
    let targets: Vec<Behavior> =
        DeterministicStrategy::all(Scenario::new(2)?).iter().map(|s| s.behavior::<f64>()).collect();
    let mut hit = vec![false; targets.len()];
    for f in 0..4u8 {
        for g in 0..4u8 {
            let p = BellBehavior::local_deterministic(&[f & 1, f >> 1], [g & 1, g >> 1]);
            let img = instrumental_from_exo(&exo_map_g(&bell_joint(&p, &[0.5, 0.5], [0.5, 0.5])?, &["A"])?)?;
            for (k, t) in targets.iter().enumerate() {
                if img.max_abs_diff(t) < 1e-12 {
                    hit[k] = true;
                }
            }
        }
    }
    let covered = hit.iter().filter(|h| **h).count();
    Ok((iso && covered == 16, format!("isomorphic to Bell DAG: {iso}; deterministic instrumental points reached: {covered}/16")))
}

fn witness_tables() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/x3_witness.json");
    let w: SteeringWitness = read_json(&path)?;
    // Tables are printed to three significant digits.
    let rep = verify_witness(&w, &x3_assemblage(1.0)?, 1e-3)?;
    let obs_ok = within(rep.observational_value, 0.672, 0.005);
    let rhs_ok = within(rep.prop3_rhs, 0.542, 0.005);
    Ok((
        rep.feasible && obs_ok && rhs_ok,
        format!(
            "dual-feasible {} (worst margin {:.1e}, tol 1e-3); observational value {:.4} (target 0.672 ± 0.005) {}; Σ‖V⁻‖ = {:.4} (target 0.542 ± 0.005) {}; Σ_x max_a ‖W⁺‖ = {:.4}",
            rep.feasible,
            rep.worst_margin,
            rep.observational_value,
            if obs_ok { "ok" } else { "MISS" },
            rep.prop3_rhs,
            if rhs_ok { "ok" } else { "MISS" },
            rep.usefulness_lhs
        ),
    ))
}

fn tripartite_visibilities() -> Outcome {
    let opts = VisibilityOptions::default();
    let with = critical_visibility(SteeringScenario::Tripartite, DataRegime::Interventional, &opts)?;
    let without = critical_visibility(SteeringScenario::Tripartite, DataRegime::Observational, &opts)?;
    Ok((
        within(with.visibility, 0.577, 0.005) && within(without.visibility, 0.744, 0.005),
        format!(
            "with interventions {:.4} (target 0.577 ± 0.005), observational only {:.4} (target 0.744 ± 0.005)",
            with.visibility, without.visibility
        ),
    ))
}

fn property_suite() -> Outcome {
    let opts = steering_sdp_options();
    let mut worst_gap = 0.0f64;
    for seed in 0..100u64 {
        let mut r = rng(seed);
        let e = random_quantum_assemblage(r.gen_range(2..=3), &mut r)?;
        let regime = if seed % 2 == 0 { DataRegime::Observational } else { DataRegime::Interventional };
        let t = robustness_primal(&e, regime, &opts)?;
        worst_gap = worst_gap.max((t.tau - t.dual_objective).abs());
    }
    let mut worst_mix = 0.0f64;
    let mut r = rng(10);
    for _ in 0..50 {
        let l = r.gen_range(2..=3);
        let a = random_classical_assemblage(l, &mut r)?;
        let b = random_classical_assemblage(l, &mut r)?;
        let m = a.mixture(&b, r.gen())?;
        worst_mix = worst_mix.max(robustness_primal(&m, DataRegime::Interventional, &opts)?.tau);
    }
    let mut worst_trivial = f64::INFINITY;
    for seed in 0..1000 {
        let b = random_quantum_behavior(2 + (seed % 3) as usize, &mut rng(seed))?;
        worst_trivial = worst_trivial.min(trivial_min(&b));
    }
    Ok((
        worst_gap <= 1e-6 && worst_mix <= 1e-7 && worst_trivial >= -1e-12,
        format!(
            "duality gap max {worst_gap:.1e} on 100 (≤ 1e-6); classical mixtures τ max {worst_mix:.1e} on 50 (≤ 1e-7); quantum trivial-class min {worst_trivial:.1e} on 1000 (≥ 0)"
        ),
    ))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "maximal violation model", budget: Duration::from_secs(1), run: max_violation },
        Criterion { id: 2, name: "seesaw lower bound", budget: Duration::from_secs(60), run: seesaw_bound },
        Criterion { id: 3, name: "facets and membership at l = 2", budget: Duration::from_secs(300), run: completeness },
        Criterion { id: 4, name: "detection thresholds", budget: Duration::from_secs(900), run: detection_thresholds },
        Criterion { id: 5, name: "Hardy implies CHSH", budget: Duration::from_secs(10), run: hardy_chsh },
        Criterion { id: 6, name: "instrumental-Bell bijection", budget: Duration::from_secs(10), run: bijection },
        Criterion { id: 7, name: "exogenization", budget: Duration::from_secs(10), run: exogenization },
        Criterion { id: 8, name: "x3 witness tables", budget: Duration::from_secs(60), run: witness_tables },
        Criterion { id: 9, name: "tripartite critical visibilities", budget: Duration::from_secs(1800), run: tripartite_visibilities },
        Criterion { id: 10, name: "property suite", budget: Duration::from_secs(600), run: property_suite },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let t = Instant::now();
        let outcome = (c.run)();
        let elapsed = t.elapsed();
        let in_budget = elapsed <= c.budget;
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && in_budget, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "[{}] {:>2} {}: {detail} [{:.2}s / budget {}s]",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
        if !ok {
            failed.push(c.id);
        }
    }
    println!("acceptance: {}/{} criteria pass; failing: {failed:?}", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
