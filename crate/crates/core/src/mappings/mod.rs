//! Maps between the instrumental and Bell scenarios, Hardy/CHSH checks, and exogenized graphs.

pub mod bell;
pub mod dag;
pub mod hardy;

pub use bell::{bell_to_instrumental, instrumental_to_bell, BellBehavior};
pub use dag::{
    bar_name, bell_dag, bell_joint, exo_map_g, exogenize, instrumental_dag, instrumental_from_exo, CondTable, Dag, ExoImage, InterventionalScenario,
    JointTable, Node, NodeKind,
};
pub use hardy::{hardy_implies_chsh_check, hardy_value, HardyCheckReport, HardyRelabeling};
