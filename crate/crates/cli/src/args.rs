//! Command-line and config-file arguments.
//!
//! A config file is a JSON object `{"command": "<subcommand>", "<flag>": value, ...}`. It is
//! expanded into ordinary arguments and parsed by clap, so defaults and validation are shared.
//! The `config` echo in every manifest has the same shape and can be replayed.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(name = "hybrid-bell", version, about = "Observational-interventional Bell scenarios: polytopes, quantum violations, mappings and steering SDPs")]
pub struct Cli {
    /// JSON config file replacing the subcommand and its flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for result files and manifest.json.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case", rename_all_fields = "kebab-case")]
pub enum Command {
    /// Evaluate inequalities on a behavior (minimum over relabelings).
    Eval {
        #[arg(long)]
        behavior: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        inequality: Inequality,
        #[arg(long, default_value = "eval.json")]
        out: PathBuf,
    },
    /// Decide membership in the classical polytope.
    Membership {
        #[arg(long)]
        behavior: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        method: MembershipMethod,
        /// Convert the input to exact rationals before solving.
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value = "membership.json")]
        out: PathBuf,
    },
    /// Enumerate the facets of the classical polytope exactly.
    Facets {
        #[arg(long, default_value_t = 2)]
        l: usize,
        #[arg(long, default_value = "facets.json")]
        out: PathBuf,
    },
    /// Search for the largest quantum violation with the seesaw.
    QuantumViolation {
        #[arg(long, default_value_t = 2)]
        l: usize,
        #[arg(long, value_enum, default_value = "il22")]
        inequality: Target,
        #[command(flatten)]
        #[serde(flatten)]
        seesaw: SeesawArgs,
        #[arg(long, default_value = "quantum_violation.json")]
        out: PathBuf,
    },
    /// Best I_222 value on an efficiency grid over [0.5, 1]².
    EfficiencySweep {
        #[arg(long, default_value_t = 16)]
        grid: usize,
        #[command(flatten)]
        #[serde(flatten)]
        seesaw: SeesawArgs,
        /// Outcome that absorbs Alice's no-detection events.
        #[arg(long, default_value_t = 1)]
        a_star: usize,
        /// Outcome that absorbs Bob's no-detection events.
        #[arg(long, default_value_t = 1)]
        b_star: usize,
        /// Also bisect the symmetric and asymmetric thresholds and the boundary samples.
        #[arg(long)]
        thresholds: bool,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
    /// Check the Hardy and CHSH inequalities and the identity linking them.
    HardyCheck {
        /// Bell behavior `{"p": [x][y][a][b]}`, or an instrumental behavior with --instrumental.
        #[arg(long)]
        behavior: PathBuf,
        /// Map an instrumental behavior to the Bell scenario first.
        #[arg(long)]
        instrumental: bool,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value = "hardy_check.json")]
        out: PathBuf,
    },
    /// Exogenize intervention targets of a DAG.
    Exogenize {
        #[arg(long)]
        dag: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        targets: Vec<String>,
        /// Report whether the result is isomorphic to this DAG.
        #[arg(long)]
        compare: Option<PathBuf>,
        #[arg(long, default_value = "exogenized.json")]
        out: PathBuf,
    },
    /// Classical robustness of an extended assemblage, with the optimal witness.
    SteeringRobustness {
        #[command(flatten)]
        #[serde(flatten)]
        source: AssemblageSource,
        #[arg(long, value_enum, default_value = "interventions")]
        data: DataArg,
        /// Classical model for the tripartite scenario.
        #[arg(long, value_enum, default_value = "communicating")]
        model: ModelArg,
        /// Write the dual witness here (bipartite scenarios only).
        #[arg(long)]
        witness_out: Option<PathBuf>,
        #[arg(long, default_value = "robustness.json")]
        out: PathBuf,
    },
    /// Check dual feasibility of a witness and evaluate it on an assemblage.
    WitnessVerify {
        #[arg(long)]
        witness: PathBuf,
        #[command(flatten)]
        #[serde(flatten)]
        source: AssemblageSource,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value = "witness_verify.json")]
        out: PathBuf,
    },
    /// Smallest visibility with nonzero robustness, by parallel bisection.
    CriticalVisibility {
        #[arg(long, value_enum)]
        scenario: VisibilityScenario,
        #[arg(long, value_enum, default_value = "interventions")]
        data: DataArg,
        #[arg(long, value_enum, default_value = "communicating")]
        model: ModelArg,
        #[arg(long, default_value_t = 1e-4)]
        precision: f64,
        #[arg(long, default_value_t = 1e-7)]
        threshold: f64,
        #[arg(long, default_value = "critical_visibility.json")]
        out: PathBuf,
    },
    /// Robustness along the remote-state-preparation families.
    RspSweep {
        #[arg(long, value_enum, default_value = "phi")]
        family: RspFamily,
        #[arg(long, default_value_t = 33)]
        points: usize,
        #[arg(long, default_value = "rsp_sweep.csv")]
        out: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::Membership { .. } => "membership",
            Command::Facets { .. } => "facets",
            Command::QuantumViolation { .. } => "quantum-violation",
            Command::EfficiencySweep { .. } => "efficiency-sweep",
            Command::HardyCheck { .. } => "hardy-check",
            Command::Exogenize { .. } => "exogenize",
            Command::SteeringRobustness { .. } => "steering-robustness",
            Command::WitnessVerify { .. } => "witness-verify",
            Command::CriticalVisibility { .. } => "critical-visibility",
            Command::RspSweep { .. } => "rsp-sweep",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::QuantumViolation { seesaw, .. } | Command::EfficiencySweep { seesaw, .. } => Some(seesaw.seed),
            _ => None,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SeesawArgs {
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct AssemblageSource {
    /// Assemblage JSON `{"obs": [x][a], "do": [a]}` with `[re, im]` entries.
    #[arg(long, required_unless_present = "scenario", conflicts_with = "scenario")]
    pub assemblage: Option<PathBuf>,
    /// Built-in scenario; its parameter is given with --param.
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioArg>,
    /// Visibility v (x3, tripartite), angle φ (rsp) or θ (rsp-entanglement).
    #[arg(long, default_value_t = 1.0)]
    pub param: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inequality {
    All,
    Il22,
    Trivial,
    I1,
    I2,
    I3,
    C1,
    C2,
    C3,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MembershipMethod {
    Lp,
    Constructive,
    Both,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Il22,
    I1,
    I2,
    I3,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataArg {
    #[value(alias = "interventional")]
    Interventions,
    Observational,
    /// No-communication steering test (bipartite only).
    Standard,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Communicating,
    NoInfluence,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioArg {
    X3,
    Rsp,
    RspEntanglement,
    Tripartite,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VisibilityScenario {
    X3,
    Tripartite,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RspFamily {
    /// Measurement angle φ ∈ [0, 2π] on the singlet.
    Phi,
    /// Entanglement angle θ ∈ [0, π/2] of cos θ|00⟩ + sin θ|11⟩.
    Theta,
}

/// Arguments equivalent to a config object; `null` and `false` entries are dropped.
pub fn config_to_args(config: &Value) -> Result<Vec<String>, String> {
    let obj = config.as_object().ok_or("config must be a JSON object")?;
    let command = obj.get("command").and_then(Value::as_str).ok_or("config needs a string \"command\" entry")?;
    let mut args = vec![command.to_string()];
    for (key, value) in obj {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => args.push(flag),
            Value::String(s) => args.extend([flag, s.clone()]),
            Value::Number(n) => args.extend([flag, n.to_string()]),
            Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|v| match v {
                        Value::String(s) => Ok(s.clone()),
                        Value::Number(n) => Ok(n.to_string()),
                        _ => Err(format!("unsupported list entry in \"{key}\"")),
                    })
                    .collect::<Result<_, _>>()?;
                args.extend([flag, parts.join(",")]);
            }
            // Flattened groups are written inline by the manifest echo; nested objects are
            // accepted with the same meaning.
            Value::Object(inner) => {
                let mut nested = serde_json::Map::new();
                nested.insert("command".into(), Value::String(command.into()));
                nested.extend(inner.clone());
                args.extend(config_to_args(&Value::Object(nested))?.into_iter().skip(1));
            }
        }
    }
    Ok(args)
}
