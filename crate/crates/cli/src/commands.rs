//! Subcommand implementations. Each returns the files it wrote and a JSON summary that is
//! printed and copied into the manifest.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use hybrid_bell::io::{behavior_to_json, facets_to_json, read_behavior, read_json, write_csv, write_json};
use hybrid_bell::mappings::{exogenize, hardy_implies_chsh_check, instrumental_to_bell, BellBehavior, Dag};
use hybrid_bell::polytope::{
    enumerate_facets, eval_ace_bound, eval_instrumental, il22_min, membership_constructive, membership_lp, trivial_min,
    AceBound, ConstructiveOutcome, Instrumental, LinearFunctional, LpMembership, Relabeling,
};
use hybrid_bell::quantum::{
    born_behavior, efficiency_boundary, efficiency_sweep, efficiency_threshold, seesaw_optimize, Binning, EfficiencyMode,
    SeesawOptions, ThresholdOptions,
};
use hybrid_bell::solver::linalg::CMatrix;
use hybrid_bell::steering::{
    bisect_visibility, robustness_primal, rsp_assemblage, rsp_entanglement_assemblage, standard_steering_robustness,
    steering_sdp_options, tripartite_assemblage, tripartite_robustness, verify_witness, witness_dual, x3_assemblage,
    DataRegime, ExtendedAssemblage, Robustness, SteeringWitness, TripartiteModel, VisibilityOptions,
};
use hybrid_bell::{Behavior, ExactBehavior, ExtendedBehavior, HybridError, Rational, Scalar, Scenario};
use num::{BigInt, Rational64};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    AssemblageSource, Command, DataArg, Inequality, MembershipMethod, ModelArg, RspFamily, ScenarioArg, SeesawArgs, Target,
    VisibilityScenario,
};

/// Slack allowed before an inequality counts as violated.
const SATISFIED_TOL: f64 = 1e-9;
/// Boundary samples written with `efficiency-sweep --thresholds`.
const BOUNDARY_ETA1: [f64; 3] = [0.7, 0.8, 0.9];

pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    pub summary: Value,
}

pub fn run(cmd: &Command, out_dir: &Path) -> Result<Outcome, HybridError> {
    let at = |p: &Path| out_dir.join(p);
    match cmd {
        Command::Eval { behavior, inequality, out } => eval(behavior, *inequality, &at(out)),
        Command::Membership { behavior, method, exact, out } => membership(behavior, *method, *exact, &at(out)),
        Command::Facets { l, out } => facets(*l, &at(out)),
        Command::QuantumViolation { l, inequality, seesaw, out } => quantum_violation(*l, *inequality, seesaw, &at(out)),
        Command::EfficiencySweep { grid, seesaw, a_star, b_star, thresholds, out } => {
            sweep(*grid, seesaw, *a_star, *b_star, *thresholds, &at(out), out_dir)
        }
        Command::HardyCheck { behavior, instrumental, tol, out } => hardy(behavior, *instrumental, *tol, &at(out)),
        Command::Exogenize { dag, targets, compare, out } => exo(dag, targets, compare.as_deref(), &at(out)),
        Command::SteeringRobustness { source, data, model, witness_out, out } => {
            steering(source, *data, *model, witness_out.as_deref().map(at).as_deref(), &at(out))
        }
        Command::WitnessVerify { witness, source, tol, out } => witness_verify(witness, source, *tol, &at(out)),
        Command::CriticalVisibility { scenario, data, model, precision, threshold, out } => {
            visibility(*scenario, *data, *model, *precision, *threshold, &at(out))
        }
        Command::RspSweep { family, points, out } => rsp_sweep(*family, *points, &at(out)),
    }
}

fn domain(msg: impl Into<String>) -> HybridError {
    HybridError::Domain(msg.into())
}

fn eval(path: &Path, which: Inequality, out: &Path) -> Result<Outcome, HybridError> {
    let b = read_behavior(path)?;
    let l = b.l();
    let selected: Vec<Inequality> = match which {
        Inequality::All => vec![
            Inequality::Trivial,
            Inequality::Il22,
            Inequality::I1,
            Inequality::I2,
            Inequality::I3,
            Inequality::C1,
            Inequality::C2,
            Inequality::C3,
        ],
        w => vec![w],
    };
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for w in selected {
        match eval_one(&b, w) {
            Ok(v) => results.push(v),
            // `all` reports what the setting count allows; an explicit request must succeed.
            Err(HybridError::Domain(msg)) if which == Inequality::All => skipped.push(json!({"inequality": label(w), "reason": msg})),
            Err(e) => return Err(e),
        }
    }
    for r in &results {
        println!("{} {} = {}", r["inequality"].as_str().unwrap_or(""), r["statistic"].as_str().unwrap_or(""), r["value"]);
    }
    let report = json!({"l": l, "ace": b.ace(), "results": results, "skipped": skipped});
    write_json(out, &report)?;
    let violated: Vec<&Value> = results.iter().filter(|r| r["satisfied"] == false).map(|r| &r["inequality"]).collect();
    Ok(Outcome { outputs: vec![out.into()], summary: json!({"violated": violated}) })
}

fn label(w: Inequality) -> &'static str {
    match w {
        Inequality::All => "all",
        Inequality::Il22 => "Il22",
        Inequality::Trivial => "trivial",
        Inequality::I1 => "I1",
        Inequality::I2 => "I2",
        Inequality::I3 => "I3",
        Inequality::C1 => "C1",
        Inequality::C2 => "C2",
        Inequality::C3 => "C3",
    }
}

fn eval_one(b: &Behavior, w: Inequality) -> Result<Value, HybridError> {
    let l = b.l();
    Ok(match w {
        Inequality::Il22 => {
            let (v, f) = il22_min(b);
            json!({"inequality": "Il22", "statistic": "min", "value": v, "classical": ">= 0",
                   "satisfied": v >= -SATISFIED_TOL, "functional": f.coefficient_map()})
        }
        Inequality::Trivial => {
            let v = trivial_min(b);
            json!({"inequality": "trivial", "statistic": "min", "value": v, "classical": ">= 0", "satisfied": v >= -SATISFIED_TOL})
        }
        Inequality::I1 | Inequality::I2 | Inequality::I3 => {
            let which = Instrumental::from_index(match w {
                Inequality::I1 => 1,
                Inequality::I2 => 2,
                _ => 3,
            })?;
            which.value_functional::<f64>(l)?;
            let mut v = f64::NEG_INFINITY;
            for r in Relabeling::all(l) {
                v = v.max(eval_instrumental(b, which, &r)?);
            }
            json!({"inequality": label(w), "statistic": "max", "value": v, "classical": "<= 0", "satisfied": v <= SATISFIED_TOL})
        }
        Inequality::C1 | Inequality::C2 | Inequality::C3 => {
            let which = AceBound::from_index(match w {
                Inequality::C1 => 1,
                Inequality::C2 => 2,
                _ => 3,
            })?;
            let (c, ok) = eval_ace_bound(b, which)?;
            json!({"inequality": label(w), "statistic": "bound", "value": c, "classical": "ace >= bound", "satisfied": ok})
        }
        Inequality::All => unreachable!("expanded by the caller"),
    })
}

/// Nearest simple fraction to each entry, so decimal inputs such as 0.1 stay normalized.
fn to_exact(b: &Behavior) -> Result<ExactBehavior, HybridError> {
    let conv = |v: f64| -> Result<Rational, HybridError> {
        let r = Rational64::approximate_float(v).ok_or_else(|| domain(format!("{v} has no rational approximation")))?;
        Ok(Rational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom())))
    };
    let table = |t: &[[f64; 2]; 2]| -> Result<[[Rational; 2]; 2], HybridError> {
        Ok([[conv(t[0][0])?, conv(t[0][1])?], [conv(t[1][0])?, conv(t[1][1])?]])
    };
    let obs = b.obs_table().iter().map(table).collect::<Result<Vec<_>, _>>()?;
    let e = ExtendedBehavior::new(obs, table(b.do_table())?)?;
    if !e.is_valid() {
        return Err(domain("behavior is not normalized after rational conversion"));
    }
    Ok(e)
}

fn membership(path: &Path, method: MembershipMethod, exact: bool, out: &Path) -> Result<Outcome, HybridError> {
    let b = read_behavior(path)?;
    let report = if exact {
        membership_report(&to_exact(&b)?, method, |v: &Rational| json!(v.to_string()))?
    } else {
        membership_report(&b, method, |v: &f64| json!(v))?
    };
    println!("member: {}", report["member"]);
    write_json(out, &report)?;
    Ok(Outcome { outputs: vec![out.into()], summary: json!({"member": report["member"], "agree": report["agree"]}) })
}

fn membership_report<T: Scalar>(
    b: &ExtendedBehavior<T>,
    method: MembershipMethod,
    num: impl Fn(&T) -> Value,
) -> Result<Value, HybridError> {
    let mut report = json!({"l": b.l(), "exact": std::any::type_name::<T>() != "f64"});
    let mut verdicts = Vec::new();
    if method != MembershipMethod::Constructive {
        let lp = membership_lp(b)?;
        verdicts.push(lp.is_member());
        report["lp"] = match lp {
            LpMembership::Member { decomposition, margin } => json!({
                "member": true,
                "margin": num(&margin),
                "decomposition": decomposition
                    .iter()
                    .map(|(s, w)| json!({"f": s.f, "g": s.g, "weight": num(w)}))
                    .collect::<Vec<_>>(),
            }),
            LpMembership::NonMember { certificate, violation } => json!({
                "member": false,
                "violation": num(&violation),
                "certificate": certificate.coefficient_map(),
            }),
        };
    }
    if method != MembershipMethod::Lp {
        let c = membership_constructive(b)?;
        verdicts.push(c.is_feasible());
        report["constructive"] = match c {
            ConstructiveOutcome::Feasible { joint, boundary } => json!({
                "member": true,
                "boundary": boundary,
                "min_entry": num(&joint.min_entry()),
                "joint": joint.entries().iter().map(&num).collect::<Vec<_>>(),
            }),
            ConstructiveOutcome::Infeasible { worst, boundary } => {
                json!({"member": false, "boundary": boundary, "worst": num(&worst)})
            }
        };
    }
    report["member"] = json!(verdicts[0]);
    report["agree"] = json!(verdicts.iter().all(|&v| v == verdicts[0]));
    Ok(report)
}

fn facets(l: usize, out: &Path) -> Result<Outcome, HybridError> {
    let report = enumerate_facets(Scenario::new(l)?)?;
    let j = facets_to_json(&report);
    let orbits: Vec<Value> = j.orbits.iter().map(|o| json!({"class": o.class, "size": o.size})).collect();
    println!("{} facets in {} orbits", j.facet_count, orbits.len());
    write_json(out, &j)?;
    Ok(Outcome {
        outputs: vec![out.into()],
        summary: json!({"facet_count": j.facet_count, "vertex_count": j.vertex_count, "orbits": orbits}),
    })
}

fn seesaw_options(s: &SeesawArgs) -> SeesawOptions {
    SeesawOptions { restarts: s.restarts, max_iterations: s.max_iterations, seed: s.seed, ..SeesawOptions::default() }
}

fn matrix_json(m: &CMatrix) -> Value {
    json!((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn quantum_violation(l: usize, target: Target, s: &SeesawArgs, out: &Path) -> Result<Outcome, HybridError> {
    // The seesaw minimizes; I1..I3 are violated when positive, so their negation is minimized.
    let (name, objective, sign): (&str, LinearFunctional<f64>, f64) = match target {
        Target::Il22 => ("Il22", LinearFunctional::il22(l, 0, 0, 0, 1)?, 1.0),
        Target::I1 | Target::I2 | Target::I3 => {
            let i = match target {
                Target::I1 => 1,
                Target::I2 => 2,
                _ => 3,
            };
            (["I1", "I2", "I3"][i as usize - 1], Instrumental::from_index(i)?.value_functional(l)?.scaled(&-1.0), -1.0)
        }
    };
    let res = seesaw_optimize(&objective, &seesaw_options(s))?;
    let value = sign * res.value;
    let violated = value * sign < -SATISFIED_TOL;
    let behavior: Value = serde_json::from_str(&behavior_to_json(&born_behavior(&res.model)?)?)?;
    let report = json!({
        "inequality": name,
        "l": l,
        "value": value,
        "classical_bound": 0.0,
        "violated": violated,
        "converged": res.converged,
        "restart_values": res.restart_values.iter().map(|v| sign * v).collect::<Vec<_>>(),
        "model": {
            "rho": matrix_json(&res.model.rho),
            "alice": res.model.alice.iter().map(|p| [matrix_json(&p[0]), matrix_json(&p[1])]).collect::<Vec<_>>(),
            "bob": res.model.bob.iter().map(|p| [matrix_json(&p[0]), matrix_json(&p[1])]).collect::<Vec<_>>(),
        },
        "behavior": behavior,
    });
    println!("{name} best = {value}");
    write_json(out, &report)?;
    Ok(Outcome { outputs: vec![out.into()], summary: json!({"value": value, "violated": violated, "converged": res.converged}) })
}

fn sweep(
    grid: usize,
    s: &SeesawArgs,
    a_star: usize,
    b_star: usize,
    thresholds: bool,
    out: &Path,
    out_dir: &Path,
) -> Result<Outcome, HybridError> {
    if a_star > 1 || b_star > 1 {
        return Err(domain(format!("binning outcomes must be 0 or 1, got a*={a_star}, b*={b_star}")));
    }
    let binning = Binning { a_star, b_star };
    let points = efficiency_sweep(grid, binning, &seesaw_options(s))?;
    write_csv(out, &points)?;
    let violating = points.iter().filter(|p| p.best_il22 < -SATISFIED_TOL).count();
    println!("{} grid points, {violating} with a violation", points.len());
    let mut outputs = vec![out.to_path_buf()];
    let mut summary = json!({"points": points.len(), "violating": violating});
    if thresholds {
        let with = |mode| ThresholdOptions { binning, ..ThresholdOptions::for_mode(mode, s.seed) };
        let sym = efficiency_threshold(EfficiencyMode::Symmetric, &with(EfficiencyMode::Symmetric))?;
        let fixed = EfficiencyMode::FixEta1(1.0);
        let asym = efficiency_threshold(fixed, &with(fixed))?;
        let boundary = efficiency_boundary(&BOUNDARY_ETA1, &with(fixed))?;
        let t = json!({
            "symmetric": sym,
            "eta1_perfect": asym,
            "boundary": boundary.iter().map(|(e1, e2)| json!({"eta1": e1, "eta2": e2})).collect::<Vec<_>>(),
        });
        println!("thresholds: symmetric {:.4}, eta1 = 1 {:.4}", sym.eta, asym.eta);
        let path = out_dir.join("thresholds.json");
        write_json(&path, &t)?;
        outputs.push(path);
        summary["symmetric_threshold"] = json!(sym.eta);
        summary["asymmetric_threshold"] = json!(asym.eta);
    }
    Ok(Outcome { outputs, summary })
}

fn hardy(path: &Path, instrumental: bool, tol: f64, out: &Path) -> Result<Outcome, HybridError> {
    let p = if instrumental {
        instrumental_to_bell(&read_behavior(path)?)?
    } else {
        let raw: BellBehavior = read_json(path)?;
        BellBehavior::new(raw.table().to_vec())?
    };
    let r = hardy_implies_chsh_check(&p, tol)?;
    let implication = r.implication_holds();
    println!("hardy holds: {}, chsh holds: {}, identity residual {:.2e}", r.hardy_holds, r.chsh_holds, r.identity_residual);
    let mut report = serde_json::to_value(&r)?;
    report["implication_holds"] = json!(implication);
    write_json(out, &report)?;
    Ok(Outcome {
        outputs: vec![out.into()],
        summary: json!({"hardy_holds": r.hardy_holds, "chsh_holds": r.chsh_holds, "implication_holds": implication,
                        "identity_residual": r.identity_residual}),
    })
}

fn exo(path: &Path, targets: &[String], compare: Option<&Path>, out: &Path) -> Result<Outcome, HybridError> {
    let dag: Dag = read_json(path)?;
    let names: Vec<&str> = targets.iter().map(String::as_str).collect();
    let g = exogenize(&dag, &names)?;
    write_json(out, &g)?;
    let mut summary = json!({"nodes": g.nodes().len(), "edges": g.edges().count()});
    if let Some(c) = compare {
        let other: Dag = read_json(c)?;
        let iso = g.is_isomorphic(&other);
        println!("isomorphic to {}: {iso}", c.display());
        summary["isomorphic"] = json!(iso);
    } else {
        println!("{} nodes, {} edges", g.nodes().len(), g.edges().count());
    }
    Ok(Outcome { outputs: vec![out.into()], summary })
}

fn regime(d: DataArg) -> Option<DataRegime> {
    match d {
        DataArg::Interventions => Some(DataRegime::Interventional),
        DataArg::Observational => Some(DataRegime::Observational),
        DataArg::Standard => None,
    }
}

fn tripartite_model(m: ModelArg) -> TripartiteModel {
    match m {
        ModelArg::Communicating => TripartiteModel::Communicating,
        ModelArg::NoInfluence => TripartiteModel::NoInfluence,
    }
}

fn bipartite(source: &AssemblageSource) -> Result<ExtendedAssemblage, HybridError> {
    match (&source.assemblage, source.scenario) {
        (Some(p), _) => {
            let e: ExtendedAssemblage = read_json(p)?;
            e.validate()?;
            Ok(e)
        }
        (None, Some(ScenarioArg::X3)) => x3_assemblage(source.param),
        (None, Some(ScenarioArg::Rsp)) => rsp_assemblage(source.param),
        (None, Some(ScenarioArg::RspEntanglement)) => rsp_entanglement_assemblage(source.param),
        (None, Some(ScenarioArg::Tripartite)) => Err(domain("the tripartite scenario has no bipartite assemblage")),
        (None, None) => Err(HybridError::Parse("one of --assemblage or --scenario is required".into())),
    }
}

#[derive(Serialize)]
struct RobustnessJson {
    tau: f64,
    dual_objective: f64,
    noise_weight: f64,
    capped: bool,
    status: String,
    iterations: usize,
    primal_residual: f64,
    primal_cone_residual: f64,
    dual_cone_residual: f64,
    gap: f64,
}

impl From<&Robustness> for RobustnessJson {
    fn from(r: &Robustness) -> Self {
        RobustnessJson {
            tau: r.tau,
            dual_objective: r.dual_objective,
            noise_weight: r.noise_weight(),
            capped: r.capped,
            status: format!("{:?}", r.status),
            iterations: r.iterations,
            primal_residual: r.residuals.primal,
            primal_cone_residual: r.residuals.primal_cone,
            dual_cone_residual: r.residuals.dual_cone,
            gap: r.residuals.gap(),
        }
    }
}

fn steering(
    source: &AssemblageSource,
    data: DataArg,
    model: ModelArg,
    witness_out: Option<&Path>,
    out: &Path,
) -> Result<Outcome, HybridError> {
    let opts = steering_sdp_options();
    let mut outputs = Vec::new();
    let r = if source.scenario == Some(ScenarioArg::Tripartite) && source.assemblage.is_none() {
        if witness_out.is_some() {
            return Err(domain("witness export is only available for bipartite assemblages"));
        }
        let reg = regime(data).ok_or_else(|| domain("the standard test is only defined for bipartite assemblages"))?;
        tripartite_robustness(&tripartite_assemblage(source.param)?, reg, tripartite_model(model), &opts)?
    } else {
        let e = bipartite(source)?;
        match regime(data) {
            None if witness_out.is_some() => return Err(domain("witness export needs --data interventions or observational")),
            None => standard_steering_robustness(&e, &opts)?,
            Some(reg) => {
                if let Some(w) = witness_out {
                    let (witness, _) = witness_dual(&e, reg, &opts)?;
                    write_json(w, &witness)?;
                    outputs.push(w.to_path_buf());
                }
                robustness_primal(&e, reg, &opts)?
            }
        }
    };
    let j = RobustnessJson::from(&r);
    println!("tau = {}", j.tau);
    write_json(out, &j)?;
    outputs.insert(0, out.to_path_buf());
    Ok(Outcome { outputs, summary: json!({"tau": j.tau, "capped": j.capped, "gap": j.gap}) })
}

fn witness_verify(path: &Path, source: &AssemblageSource, tol: f64, out: &Path) -> Result<Outcome, HybridError> {
    let w: SteeringWitness = read_json(path)?;
    let e = bipartite(source)?;
    let r = verify_witness(&w, &e, tol)?;
    println!("feasible: {}, total value {}", r.feasible, r.total_value);
    write_json(out, &r)?;
    Ok(Outcome {
        outputs: vec![out.into()],
        summary: json!({"feasible": r.feasible, "worst_margin": r.worst_margin, "total_value": r.total_value, "useful": r.useful}),
    })
}

fn visibility(
    scenario: VisibilityScenario,
    data: DataArg,
    model: ModelArg,
    precision: f64,
    threshold: f64,
    out: &Path,
) -> Result<Outcome, HybridError> {
    if !(precision > 0.0 && precision < 1.0) {
        return Err(domain(format!("precision must lie in (0, 1), got {precision}")));
    }
    let opts = VisibilityOptions { threshold, precision, sdp: steering_sdp_options(), ..VisibilityOptions::default() };
    let sdp = &opts.sdp;
    let cv = match (scenario, regime(data)) {
        (VisibilityScenario::X3, Some(reg)) => bisect_visibility(|v| Ok(robustness_primal(&x3_assemblage(v)?, reg, sdp)?.tau), &opts)?,
        (VisibilityScenario::X3, None) => {
            bisect_visibility(|v| Ok(standard_steering_robustness(&x3_assemblage(v)?, sdp)?.tau), &opts)?
        }
        (VisibilityScenario::Tripartite, Some(reg)) => bisect_visibility(
            |v| Ok(tripartite_robustness(&tripartite_assemblage(v)?, reg, tripartite_model(model), sdp)?.tau),
            &opts,
        )?,
        (VisibilityScenario::Tripartite, None) => {
            return Err(domain("the standard test is only defined for bipartite assemblages"));
        }
    };
    println!("critical visibility = {:.6} (classical below {:.6})", cv.visibility, cv.classical_below);
    write_json(out, &cv)?;
    Ok(Outcome { outputs: vec![out.into()], summary: json!({"visibility": cv.visibility, "classical_below": cv.classical_below}) })
}

#[derive(Serialize)]
struct RspRow {
    param: f64,
    tau_interventional: f64,
    tau_observational: f64,
}

fn rsp_sweep(family: RspFamily, points: usize, out: &Path) -> Result<Outcome, HybridError> {
    if points < 2 {
        return Err(domain(format!("rsp sweep needs at least 2 points, got {points}")));
    }
    type Family = fn(f64) -> Result<ExtendedAssemblage, HybridError>;
    let (end, make): (f64, Family) = match family {
        RspFamily::Phi => (2.0 * PI, rsp_assemblage),
        RspFamily::Theta => (PI / 2.0, rsp_entanglement_assemblage),
    };
    let opts = steering_sdp_options();
    // Each point is an independent deterministic solve, so the ordered collect is reproducible.
    let rows = (0..points)
        .into_par_iter()
        .map(|i| {
            let param = end * i as f64 / (points - 1) as f64;
            let e = make(param)?;
            Ok(RspRow {
                param,
                tau_interventional: robustness_primal(&e, DataRegime::Interventional, &opts)?.tau,
                tau_observational: robustness_primal(&e, DataRegime::Observational, &opts)?.tau,
            })
        })
        .collect::<Result<Vec<_>, HybridError>>()?;
    write_csv(out, &rows)?;
    let peak = rows.iter().map(|r| r.tau_interventional).fold(0.0, f64::max);
    println!("{points} points, max interventional tau {peak}");
    Ok(Outcome { outputs: vec![out.into()], summary: json!({"points": points, "max_tau_interventional": peak}) })
}
