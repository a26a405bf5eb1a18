//! JSON and CSV formats.
//!
//! Behaviors are `{"l": 2, "obs": [[[..]]], "do": [[..]]}` with `obs[x][a][b]` and `do[a][b]`;
//! their CSV export is two tables, `x,a,b,p` and `a,b,p_do`. Assemblages and witnesses use
//! `[re, im]` pairs for complex entries (see [`crate::steering`]). DAGs are node/edge lists.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::polytope::facets::{FacetClass, FacetReport};
use crate::polytope::functional::LinearFunctional;
use crate::{Behavior, HybridError, Rational};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, HybridError> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), HybridError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(fs::write(path, text)?)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HybridError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct BehaviorJson {
    l: usize,
    obs: Vec<[[f64; 2]; 2]>,
    #[serde(rename = "do")]
    do_: [[f64; 2]; 2],
}

pub fn behavior_to_json(b: &Behavior) -> Result<String, HybridError> {
    let j = BehaviorJson { l: b.l(), obs: b.obs_table().to_vec(), do_: *b.do_table() };
    Ok(serde_json::to_string_pretty(&j)?)
}

/// Parses and validates; `l` must match the table.
pub fn behavior_from_json(text: &str) -> Result<Behavior, HybridError> {
    let j: BehaviorJson = serde_json::from_str(text)?;
    if j.obs.len() != j.l {
        return Err(HybridError::Structural(format!("l = {} but obs has {} settings", j.l, j.obs.len())));
    }
    Behavior::new(j.obs, j.do_)?.validated()
}

pub fn read_behavior(path: &Path) -> Result<Behavior, HybridError> {
    behavior_from_json(&fs::read_to_string(path)?)
}

pub fn write_behavior(path: &Path, b: &Behavior) -> Result<(), HybridError> {
    let mut text = behavior_to_json(b)?;
    text.push('\n');
    Ok(fs::write(path, text)?)
}

#[derive(Serialize)]
struct ObsRow {
    x: usize,
    a: usize,
    b: usize,
    p: f64,
}

#[derive(Serialize)]
struct DoRow {
    a: usize,
    b: usize,
    p_do: f64,
}

/// `(x,a,b,p table, a,b,p_do table)` as CSV text.
pub fn behavior_to_csv(b: &Behavior) -> Result<(String, String), HybridError> {
    let mut obs = csv::Writer::from_writer(Vec::new());
    for x in 0..b.l() {
        for a in 0..2 {
            for bb in 0..2 {
                obs.serialize(ObsRow { x, a, b: bb, p: *b.obs(x, a, bb) })?;
            }
        }
    }
    let mut dow = csv::Writer::from_writer(Vec::new());
    for a in 0..2 {
        for bb in 0..2 {
            dow.serialize(DoRow { a, b: bb, p_do: *b.do_(a, bb) })?;
        }
    }
    let finish = |w: csv::Writer<Vec<u8>>| -> Result<String, HybridError> {
        let bytes = w.into_inner().map_err(|e| HybridError::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| HybridError::Parse(e.to_string()))
    };
    Ok((finish(obs)?, finish(dow)?))
}

/// One facet: exact coefficients in the `[const, obs (x,a,b), do (a,b)]` layout plus a
/// readable map of the nonzero ones.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FacetJson {
    pub class: FacetClass,
    pub exact: Vec<String>,
    pub coefficients: BTreeMap<String, f64>,
    pub tight_vertices: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OrbitJson {
    pub class: FacetClass,
    pub size: usize,
    pub representative: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FacetsJson {
    pub l: usize,
    pub dimension: usize,
    pub vertex_count: usize,
    pub facet_count: usize,
    pub orbits: Vec<OrbitJson>,
    pub facets: Vec<FacetJson>,
}

fn exact_strings(f: &LinearFunctional<Rational>) -> Vec<String> {
    f.to_vector().iter().map(|v| v.to_string()).collect()
}

pub fn facets_to_json(r: &FacetReport) -> FacetsJson {
    let class_of = |f: &LinearFunctional<Rational>| {
        r.orbits.iter().find(|o| o.members.contains(f)).map_or(FacetClass::Other, |o| o.class)
    };
    FacetsJson {
        l: r.l,
        dimension: r.dimension,
        vertex_count: r.vertex_count,
        facet_count: r.facets.len(),
        orbits: r
            .orbits
            .iter()
            .map(|o| OrbitJson { class: o.class, size: o.members.len(), representative: o.representative.coefficient_map() })
            .collect(),
        facets: r
            .facets
            .iter()
            .map(|(f, tight)| FacetJson {
                class: class_of(f),
                exact: exact_strings(f),
                coefficients: f.coefficient_map(),
                tight_vertices: tight.clone(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn behavior_json_roundtrip_and_errors() {
        let b = crate::quantum::born_behavior(&crate::quantum::max_violation_model()).unwrap();
        let back = behavior_from_json(&behavior_to_json(&b).unwrap()).unwrap();
        assert!(back.max_abs_diff(&b) < 1e-15);
        let bad = r#"{"l": 3, "obs": [[[0.25,0.25],[0.25,0.25]],[[0.25,0.25],[0.25,0.25]]], "do": [[0.5,0.5],[0.5,0.5]]}"#;
        assert!(matches!(behavior_from_json(bad), Err(HybridError::Structural(_))));
        let unnormalized = r#"{"l": 2, "obs": [[[0.2,0.25],[0.25,0.25]],[[0.25,0.25],[0.25,0.25]]], "do": [[0.5,0.5],[0.5,0.5]]}"#;
        assert!(behavior_from_json(unnormalized).is_err());
        assert!(matches!(behavior_from_json("{"), Err(HybridError::Parse(_))));
    }

    #[test]
    fn behavior_csv_layout() {
        let (obs, do_) = behavior_to_csv(&Behavior::uniform(2).unwrap()).unwrap();
        assert_eq!(obs.lines().next(), Some("x,a,b,p"));
        assert_eq!(obs.lines().count(), 9);
        assert_eq!(do_.lines().nth(1), Some("0,0,0.5"));
    }
}
