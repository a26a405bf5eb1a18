//! Exact facet enumeration of the classical polytope, grouped into relabeling orbits.

use std::collections::BTreeMap;

use hybrid_bell_solver::dd::{affine_rank, double_description, HullOutcome};
use hybrid_bell_solver::Rational;
use rayon::prelude::*;

use super::functional::LinearFunctional;
use super::relabel::Relabeling;
use crate::behavior::{from_strategy, DeterministicStrategy, ExtendedBehavior, Scenario};
use crate::HybridError;

/// Largest `l` accepted by [`enumerate_facets`].
pub const MAX_FACET_SETTINGS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacetClass {
    Positivity,
    Trivial,
    Il22,
    Other,
}

#[derive(Clone, Debug)]
pub struct FacetOrbit {
    pub class: FacetClass,
    /// Lexicographically smallest canonical member.
    pub representative: LinearFunctional<Rational>,
    pub members: Vec<LinearFunctional<Rational>>,
}

#[derive(Clone, Debug)]
pub struct FacetReport {
    pub l: usize,
    /// Dimension of the polytope, `3l + 2`.
    pub dimension: usize,
    pub vertex_count: usize,
    /// Every facet in canonical form, with the vertex indices it is tight on.
    pub facets: Vec<(LinearFunctional<Rational>, Vec<usize>)>,
    pub orbits: Vec<FacetOrbit>,
}

impl FacetReport {
    /// Orbits other than positivity.
    pub fn nontrivial_orbits(&self) -> impl Iterator<Item = &FacetOrbit> {
        self.orbits.iter().filter(|o| o.class != FacetClass::Positivity)
    }

    /// Checks that every facet is non-negative on all vertices and tight on `dimension`
    /// affinely independent ones.
    pub fn verify(&self) -> Result<(), String> {
        let vertices = vertex_behaviors(self.l);
        let reduced: Vec<Vec<Rational>> = vertices.iter().map(reduce).collect();
        let zero = Rational::from_integer(0.into());
        for (f, support) in &self.facets {
            if let Some(v) = vertices.iter().find(|v| f.eval(v) < zero) {
                return Err(format!("facet {:?} negative on {v:?}", f.coefficient_map()));
            }
            let tight: Vec<Vec<Rational>> = support.iter().map(|&i| reduced[i].clone()).collect();
            if support.iter().any(|&i| f.eval(&vertices[i]) != zero) {
                return Err(format!("facet {:?} not tight on its support", f.coefficient_map()));
            }
            if affine_rank(&tight) + 1 != self.dimension {
                return Err(format!("facet {:?} has support of affine rank {}", f.coefficient_map(), affine_rank(&tight)));
            }
        }
        Ok(())
    }
}

fn vertex_behaviors(l: usize) -> Vec<ExtendedBehavior<Rational>> {
    DeterministicStrategy::all(Scenario::new(l).expect("l ≥ 2")).iter().map(from_strategy).collect()
}

/// Coordinates left after eliminating `obs[x][1][1]` and `do[a][1]` by normalization.
fn reduce(b: &ExtendedBehavior<Rational>) -> Vec<Rational> {
    let mut v = Vec::with_capacity(3 * b.l() + 2);
    for x in 0..b.l() {
        v.extend([b.obs(x, 0, 0).clone(), b.obs(x, 0, 1).clone(), b.obs(x, 1, 0).clone()]);
    }
    v.extend([b.do_(0, 0).clone(), b.do_(1, 0).clone()]);
    v
}

fn from_reduced(l: usize, offset: Rational, normal: &[Rational]) -> LinearFunctional<Rational> {
    let mut f = LinearFunctional::zero(l);
    f.constant = offset;
    for x in 0..l {
        f.obs[x][0][0] = normal[3 * x].clone();
        f.obs[x][0][1] = normal[3 * x + 1].clone();
        f.obs[x][1][0] = normal[3 * x + 2].clone();
    }
    f.do_[0][0] = normal[3 * l].clone();
    f.do_[1][0] = normal[3 * l + 1].clone();
    f.canonical()
}

fn orbit_key(f: &LinearFunctional<Rational>, group: &[Relabeling]) -> Vec<Rational> {
    group.iter().map(|r| f.relabel(r).canonical().to_vector()).min().expect("group is non-empty")
}

/// Runs exact double description on the `2^(l+2)` deterministic behaviors and groups the facets
/// into relabeling orbits, classified against positivity, the trivial class and I_l22.
pub fn enumerate_facets(scenario: Scenario) -> Result<FacetReport, HybridError> {
    let l = scenario.l();
    if l > MAX_FACET_SETTINGS {
        return Err(HybridError::Capacity(format!("facet enumeration supports l ≤ {MAX_FACET_SETTINGS}, got {l}")));
    }
    let vertices = vertex_behaviors(l);
    let reduced: Vec<Vec<Rational>> = vertices.iter().map(reduce).collect();
    let dimension = 3 * l + 2;
    let raw = match double_description(&reduced)? {
        HullOutcome::Facets(f) => f,
        HullOutcome::Degenerate(h) => {
            return Err(HybridError::Solver(hybrid_bell_solver::SolverError::Numerical(format!(
                "vertex set spans dimension {} instead of {dimension}",
                h.dimension
            ))))
        }
    };
    let group = Relabeling::all(l);
    let facets: Vec<(LinearFunctional<Rational>, Vec<usize>)> =
        raw.into_iter().map(|f| (from_reduced(l, f.offset, &f.normal), f.support)).collect();

    let references = [
        (FacetClass::Positivity, LinearFunctional::positivity(l, 0, 0, 0)),
        (FacetClass::Trivial, LinearFunctional::trivial(l, 0, 0, 0)),
        (FacetClass::Il22, LinearFunctional::il22(l, 0, 0, 0, 1)?),
    ];
    let reference_keys: Vec<(FacetClass, Vec<Rational>)> =
        references.iter().map(|(c, f)| (*c, orbit_key(&f.canonical(), &group))).collect();

    let keys: Vec<Vec<Rational>> = facets.par_iter().map(|(f, _)| orbit_key(f, &group)).collect();
    let mut grouped: BTreeMap<Vec<Rational>, Vec<LinearFunctional<Rational>>> = BTreeMap::new();
    for (key, (f, _)) in keys.into_iter().zip(&facets) {
        grouped.entry(key).or_default().push(f.clone());
    }
    let orbits = grouped
        .into_iter()
        .map(|(key, members)| {
            let class = reference_keys.iter().find(|(_, k)| *k == key).map_or(FacetClass::Other, |(c, _)| *c);
            FacetOrbit { class, representative: LinearFunctional::from_vector(l, &key), members }
        })
        .collect();
    Ok(FacetReport { l, dimension, vertex_count: vertices.len(), facets, orbits })
}
