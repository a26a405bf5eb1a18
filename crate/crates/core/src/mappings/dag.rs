//! Causal graphs with interventions, exogenization, and the map from distributions on the
//! exogenized graph to observational-interventional data.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::bell::BellBehavior;
use crate::behavior::ExtendedBehavior;
use crate::{Behavior, HybridError};

/// Largest dense table accepted by [`JointTable::new`].
pub const MAX_TABLE_ENTRIES: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Observable,
    Latent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
}

/// Directed acyclic graph; JSON form `{"nodes": [{"name", "kind"}], "edges": [[from, to]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DagSpec", into = "DagSpec")]
pub struct Dag {
    nodes: Vec<Node>,
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct DagSpec {
    nodes: Vec<Node>,
    edges: Vec<(String, String)>,
}

impl TryFrom<DagSpec> for Dag {
    type Error = HybridError;

    fn try_from(s: DagSpec) -> Result<Self, HybridError> {
        let edges: Vec<(&str, &str)> = s.edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        Dag::new(s.nodes, &edges)
    }
}

impl From<Dag> for DagSpec {
    fn from(d: Dag) -> Self {
        DagSpec {
            edges: d.edges.iter().map(|&(a, b)| (d.nodes[a].name.clone(), d.nodes[b].name.clone())).collect(),
            nodes: d.nodes,
        }
    }
}

impl Dag {
    pub fn new(nodes: Vec<Node>, edges: &[(&str, &str)]) -> Result<Self, HybridError> {
        let mut names = BTreeSet::new();
        for n in &nodes {
            if !names.insert(n.name.as_str()) {
                return Err(HybridError::Structural(format!("duplicate node {}", n.name)));
            }
        }
        let mut d = Dag { nodes, edges: BTreeSet::new() };
        for &(a, b) in edges {
            let (i, j) = (d.require(a)?, d.require(b)?);
            d.edges.insert((i, j));
        }
        if d.topological_order().is_none() {
            return Err(HybridError::Structural("graph has a directed cycle".into()));
        }
        Ok(d)
    }

    /// Convenience constructor: `observable` and `latent` node names, edges by name.
    pub fn from_names(observable: &[&str], latent: &[&str], edges: &[(&str, &str)]) -> Result<Self, HybridError> {
        let nodes = observable
            .iter()
            .map(|n| Node { name: n.to_string(), kind: NodeKind::Observable })
            .chain(latent.iter().map(|n| Node { name: n.to_string(), kind: NodeKind::Latent }))
            .collect();
        Dag::new(nodes, edges)
    }

    fn require(&self, name: &str) -> Result<usize, HybridError> {
        self.index_of(name).ok_or_else(|| HybridError::Structural(format!("unknown node {name}")))
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges.iter().map(|&(a, b)| (self.nodes[a].name.as_str(), self.nodes[b].name.as_str()))
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        match (self.index_of(from), self.index_of(to)) {
            (Some(i), Some(j)) => self.edges.contains(&(i, j)),
            _ => false,
        }
    }

    pub fn children(&self, name: &str) -> Vec<&str> {
        let Some(i) = self.index_of(name) else { return Vec::new() };
        self.edges.iter().filter(|e| e.0 == i).map(|e| self.nodes[e.1].name.as_str()).collect()
    }

    pub fn parents(&self, name: &str) -> Vec<&str> {
        let Some(i) = self.index_of(name) else { return Vec::new() };
        self.edges.iter().filter(|e| e.1 == i).map(|e| self.nodes[e.0].name.as_str()).collect()
    }

    fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let mut indeg = vec![0; n];
        for &(_, j) in &self.edges {
            indeg[j] += 1;
        }
        let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop() {
            order.push(i);
            for &(a, b) in &self.edges {
                if a == i {
                    indeg[b] -= 1;
                    if indeg[b] == 0 {
                        ready.push(b);
                    }
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Brute-force isomorphism test preserving node kinds (names are ignored).
    pub fn is_isomorphic(&self, other: &Dag) -> bool {
        let n = self.nodes.len();
        if n != other.nodes.len() || self.edges.len() != other.edges.len() {
            return false;
        }
        let signature = |d: &Dag, i: usize| {
            let outdeg = d.edges.iter().filter(|e| e.0 == i).count();
            let indeg = d.edges.iter().filter(|e| e.1 == i).count();
            (d.nodes[i].kind, indeg, outdeg)
        };
        let sa: Vec<_> = (0..n).map(|i| signature(self, i)).collect();
        let sb: Vec<_> = (0..n).map(|i| signature(other, i)).collect();
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; n];
        fn extend(
            k: usize,
            map: &mut [usize],
            used: &mut [bool],
            sa: &[(NodeKind, usize, usize)],
            sb: &[(NodeKind, usize, usize)],
            a: &Dag,
            b: &Dag,
        ) -> bool {
            let n = map.len();
            if k == n {
                return a.edges.iter().all(|&(i, j)| b.edges.contains(&(map[i], map[j])));
            }
            for t in 0..n {
                if !used[t] && sa[k] == sb[t] {
                    map[k] = t;
                    used[t] = true;
                    if extend(k + 1, map, used, sa, sb, a, b) {
                        return true;
                    }
                    used[t] = false;
                }
            }
            false
        }
        extend(0, &mut map, &mut used, &sa, &sb, self, other)
    }
}

/// Name of the input-only copy of an intervened node.
pub fn bar_name(name: &str) -> String {
    format!("{name}_bar")
}

/// Splits every `i ∈ targets` into `i`, which keeps its incoming edges, and a new observable
/// root `i_bar` that takes over its outgoing edges.
pub fn exogenize(dag: &Dag, targets: &[&str]) -> Result<Dag, HybridError> {
    let mut unique = BTreeSet::new();
    for &t in targets {
        let i = dag.require(t)?;
        if dag.nodes[i].kind != NodeKind::Observable {
            return Err(HybridError::Domain(format!("cannot intervene on latent node {t}")));
        }
        if !unique.insert(i) {
            return Err(HybridError::Domain(format!("node {t} listed twice")));
        }
    }
    let mut nodes = dag.nodes.clone();
    let mut edges = dag.edges.clone();
    for &i in &unique {
        let bar = nodes.len();
        let name = bar_name(&dag.nodes[i].name);
        if dag.index_of(&name).is_some() {
            return Err(HybridError::Domain(format!("node name {name} already in use")));
        }
        nodes.push(Node { name, kind: NodeKind::Observable });
        let outgoing: Vec<(usize, usize)> = dag.edges.iter().filter(|e| e.0 == i).copied().collect();
        for (_, ch) in outgoing {
            edges.remove(&(i, ch));
            edges.insert((bar, ch));
        }
    }
    let d = Dag { nodes, edges };
    debug_assert!(d.topological_order().is_some());
    Ok(d)
}

/// A graph with sequences of intervention target sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterventionalScenario {
    pub base: Dag,
    pub targets: Vec<Vec<String>>,
}

impl InterventionalScenario {
    pub fn new(base: Dag, targets: Vec<Vec<String>>) -> Result<Self, HybridError> {
        for set in &targets {
            for t in set {
                match base.index_of(t) {
                    None => return Err(HybridError::Structural(format!("unknown target {t}"))),
                    Some(i) if base.nodes[i].kind == NodeKind::Latent => {
                        return Err(HybridError::Domain(format!("target {t} is latent")))
                    }
                    _ => {}
                }
            }
        }
        Ok(InterventionalScenario { base, targets })
    }

    /// Exogenized graph for the `k`-th target set.
    pub fn exogenized(&self, k: usize) -> Result<Dag, HybridError> {
        let set = self.targets.get(k).ok_or_else(|| HybridError::Domain(format!("no target set {k}")))?;
        let names: Vec<&str> = set.iter().map(String::as_str).collect();
        exogenize(&self.base, &names)
    }
}

/// `X → A → B` with a latent `Λ` feeding `A` and `B`.
pub fn instrumental_dag() -> Dag {
    Dag::from_names(&["X", "A", "B"], &["Lambda"], &[("X", "A"), ("A", "B"), ("Lambda", "A"), ("Lambda", "B")]).expect("acyclic")
}

/// `X → A ← Λ → B ← Y`.
pub fn bell_dag() -> Dag {
    Dag::from_names(&["X", "Y", "A", "B"], &["Lambda"], &[("X", "A"), ("Y", "B"), ("Lambda", "A"), ("Lambda", "B")]).expect("acyclic")
}

/// Dense probability table over named variables, row-major in the listed order.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    pub vars: Vec<String>,
    pub card: Vec<usize>,
    pub probs: Vec<f64>,
}

fn table_size(card: &[usize]) -> Result<usize, HybridError> {
    card.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c)).filter(|&s| s <= MAX_TABLE_ENTRIES).ok_or_else(|| {
        HybridError::Capacity(format!("table over cardinalities {card:?} exceeds {MAX_TABLE_ENTRIES} entries"))
    })
}

fn decode(mut k: usize, card: &[usize]) -> Vec<usize> {
    let mut out = vec![0; card.len()];
    for i in (0..card.len()).rev() {
        out[i] = k % card[i];
        k /= card[i];
    }
    out
}

fn encode(vals: &[usize], card: &[usize]) -> usize {
    vals.iter().zip(card).fold(0, |acc, (&v, &c)| acc * c + v)
}

impl JointTable {
    pub fn new(vars: Vec<String>, card: Vec<usize>, probs: Vec<f64>) -> Result<Self, HybridError> {
        if vars.len() != card.len() {
            return Err(HybridError::Structural("one cardinality per variable required".into()));
        }
        let size = table_size(&card)?;
        if probs.len() != size {
            return Err(HybridError::Structural(format!("table needs {size} entries, got {}", probs.len())));
        }
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < -1e-12) || (total - 1.0).abs() > 1e-9 {
            return Err(HybridError::Domain(format!("not a probability table (sum {total})")));
        }
        Ok(JointTable { vars, card, probs })
    }

    fn position(&self, name: &str) -> Result<usize, HybridError> {
        self.vars.iter().position(|v| v == name).ok_or_else(|| HybridError::Structural(format!("table has no variable {name}")))
    }

    pub fn get(&self, vals: &[usize]) -> f64 {
        self.probs[encode(vals, &self.card)]
    }
}

/// Table of conditional values; `None` where the conditioning event has probability zero.
#[derive(Clone, Debug, PartialEq)]
pub struct CondTable {
    pub vars: Vec<String>,
    pub card: Vec<usize>,
    pub values: Vec<Option<f64>>,
}

impl CondTable {
    pub fn get(&self, vals: &[usize]) -> Option<f64> {
        self.values[encode(vals, &self.card)]
    }

    pub fn is_defined(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }
}

/// Image of a distribution on the exogenized graph.
#[derive(Clone, Debug, PartialEq)]
pub struct ExoImage {
    /// `q(x_U, x_Ī = x_I) / q(x_Ī = x_I)` over the original observables `U`.
    pub p_obs: CondTable,
    /// For each intervention value `c` of the targets (row-major over their cardinalities),
    /// `Σ_{x_I} q(x_U | x_Ī = c)` over `U \ I`.
    pub p_do: Vec<(Vec<usize>, CondTable)>,
}

/// Maps `q` on the observables of `G_I` (original variables plus `i_bar` copies) to
/// observational and interventional data of `(G, {I})`.
pub fn exo_map_g(q: &JointTable, targets: &[&str]) -> Result<ExoImage, HybridError> {
    let bars: Vec<usize> = targets.iter().map(|t| q.position(&bar_name(t))).collect::<Result<_, _>>()?;
    let tpos: Vec<usize> = targets.iter().map(|t| q.position(t)).collect::<Result<_, _>>()?;
    for (&t, &b) in tpos.iter().zip(&bars) {
        if q.card[t] != q.card[b] {
            return Err(HybridError::Structural(format!("{} and its copy differ in cardinality", q.vars[t])));
        }
    }
    let u: Vec<usize> = (0..q.vars.len()).filter(|i| !bars.contains(i)).collect();
    let u_card: Vec<usize> = u.iter().map(|&i| q.card[i]).collect();
    let bar_card: Vec<usize> = bars.iter().map(|&i| q.card[i]).collect();

    // Marginal of the copies.
    let mut q_bar = vec![0.0; table_size(&bar_card)?];
    let mut joint_u_bar = vec![0.0; table_size(&u_card)? * q_bar.len()];
    for (k, &p) in q.probs.iter().enumerate() {
        let vals = decode(k, &q.card);
        let cb: Vec<usize> = bars.iter().map(|&i| vals[i]).collect();
        let cu: Vec<usize> = u.iter().map(|&i| vals[i]).collect();
        let kb = encode(&cb, &bar_card);
        q_bar[kb] += p;
        joint_u_bar[encode(&cu, &u_card) * q_bar.len() + kb] += p;
    }
    let cond = |ku: usize, kb: usize| -> Option<f64> { (q_bar[kb] > 0.0).then(|| joint_u_bar[ku * q_bar.len() + kb] / q_bar[kb]) };

    // Observational: copies equal the originals.
    let u_size = table_size(&u_card)?;
    let p_obs_values = (0..u_size)
        .map(|ku| {
            let vals = decode(ku, &u_card);
            let cb: Vec<usize> = tpos.iter().map(|&t| vals[u.iter().position(|&i| i == t).expect("target in U")]).collect();
            cond(ku, encode(&cb, &bar_card))
        })
        .collect();
    let p_obs = CondTable { vars: u.iter().map(|&i| q.vars[i].clone()).collect(), card: u_card.clone(), values: p_obs_values };

    // Interventional: marginalize the targets, copies fixed to c.
    let rest: Vec<usize> = u.iter().copied().filter(|i| !tpos.contains(i)).collect();
    let rest_card: Vec<usize> = rest.iter().map(|&i| q.card[i]).collect();
    let mut p_do = Vec::new();
    for kb in 0..q_bar.len() {
        let mut values = vec![Some(0.0); table_size(&rest_card)?];
        for ku in 0..u_size {
            let vals = decode(ku, &u_card);
            let cr: Vec<usize> = rest.iter().map(|&i| vals[u.iter().position(|&j| j == i).expect("rest in U")]).collect();
            let kr = encode(&cr, &rest_card);
            values[kr] = match (values[kr], cond(ku, kb)) {
                (Some(acc), Some(v)) => Some(acc + v),
                _ => None,
            };
        }
        p_do.push((decode(kb, &bar_card), CondTable { vars: rest.iter().map(|&i| q.vars[i].clone()).collect(), card: rest_card.clone(), values }));
    }
    Ok(ExoImage { p_obs, p_do })
}

/// Joint `q(x, a, b, a_bar) = p_x(x) p_y(a_bar) p(a,b|x,y=a_bar)` on the exogenized instrumental
/// graph, variables ordered `X, A, B, A_bar`.
pub fn bell_joint(p: &BellBehavior, px: &[f64], py: [f64; 2]) -> Result<JointTable, HybridError> {
    let l = p.num_x();
    if px.len() != l {
        return Err(HybridError::Structural(format!("need {l} setting weights, got {}", px.len())));
    }
    let mut probs = vec![0.0; l * 8];
    for x in 0..l {
        for a in 0..2 {
            for b in 0..2 {
                for y in 0..2 {
                    probs[encode(&[x, a, b, y], &[l, 2, 2, 2])] = px[x] * py[y] * p.p(a, b, x, y);
                }
            }
        }
    }
    JointTable::new(vec!["X".into(), "A".into(), "B".into(), bar_name("A")], vec![l, 2, 2, 2], probs)
}

/// Instrumental behavior from the image of a joint over `X, A, B, A_bar`, dividing out `q(x)`.
pub fn instrumental_from_exo(img: &ExoImage) -> Result<Behavior, HybridError> {
    let undefined = || HybridError::Domain("conditional undefined (zero-probability conditioning event)".into());
    let card = &img.p_obs.card;
    if img.p_obs.vars != ["X", "A", "B"] || card[1] != 2 || card[2] != 2 {
        return Err(HybridError::Structural(format!("expected variables X, A, B; got {:?}", img.p_obs.vars)));
    }
    let l = card[0];
    let mut obs = vec![[[0.0; 2]; 2]; l];
    for (x, t) in obs.iter_mut().enumerate() {
        let mut qx = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                t[a][b] = img.p_obs.get(&[x, a, b]).ok_or_else(undefined)?;
                qx += t[a][b];
            }
        }
        if qx <= 0.0 {
            return Err(undefined());
        }
        t.iter_mut().flatten().for_each(|v| *v /= qx);
    }
    let mut do_ = [[0.0; 2]; 2];
    for (c, table) in &img.p_do {
        for b in 0..2 {
            do_[c[0]][b] = (0..l).map(|x| table.get(&[x, b]).ok_or_else(undefined)).sum::<Result<f64, _>>()?;
        }
    }
    ExtendedBehavior::new(obs, do_)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{from_strategy, DeterministicStrategy, Scenario};
    use crate::mappings::bell::bell_to_instrumental;

    #[test]
    fn instrumental_exogenizes_to_bell() {
        let g = exogenize(&instrumental_dag(), &["A"]).unwrap();
        assert!(g.is_isomorphic(&bell_dag()));
        assert!(!instrumental_dag().is_isomorphic(&bell_dag()));
        assert_eq!(g.nodes().len(), 5);
        assert!(g.children("A").is_empty());
        assert_eq!(g.parents("A").len(), 2);
        assert_eq!(g.children("A_bar"), vec!["B"]);
    }

    #[test]
    fn chain_split() {
        let g = Dag::from_names(
            &["A", "B", "C"],
            &["Lambda", "N"],
            &[("A", "B"), ("B", "C"), ("Lambda", "A"), ("Lambda", "B"), ("N", "C"), ("N", "B")],
        )
        .unwrap();
        let e = exogenize(&g, &["B"]).unwrap();
        let expected = Dag::from_names(
            &["A", "B", "B_bar", "C"],
            &["Lambda", "N"],
            &[("A", "B"), ("B_bar", "C"), ("Lambda", "A"), ("Lambda", "B"), ("N", "C"), ("N", "B")],
        )
        .unwrap();
        assert!(e.is_isomorphic(&expected));
        assert!(e.has_edge("B_bar", "C") && !e.has_edge("B", "C") && e.has_edge("A", "B"));
        assert_eq!(exogenize(&g, &[]).unwrap(), g);
        assert!(exogenize(&g, &["N"]).is_err());
    }

    #[test]
    fn cycles_rejected_and_json_round_trip() {
        assert!(Dag::from_names(&["A", "B"], &[], &[("A", "B"), ("B", "A")]).is_err());
        let d = instrumental_dag();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<Dag>(&s).unwrap(), d);
    }

    #[test]
    fn g_reproduces_bell_to_instrumental() {
        let p = BellBehavior::mixture(&[
            (0.5, &BellBehavior::local_deterministic(&[0, 1], [1, 0])),
            (0.3, &BellBehavior::local_deterministic(&[1, 1], [0, 0])),
            (0.2, &BellBehavior::local_deterministic(&[0, 0], [0, 1])),
        ])
        .unwrap();
        let q = bell_joint(&p, &[0.4, 0.6], [0.7, 0.3]).unwrap();
        let img = exo_map_g(&q, &["A"]).unwrap();
        let b = instrumental_from_exo(&img).unwrap();
        assert!(b.max_abs_diff(&bell_to_instrumental(&p).unwrap()) < 1e-14);
    }

    #[test]
    fn deterministic_responses_give_strategy_image() {
        for s in DeterministicStrategy::all(Scenario::new(2).unwrap()) {
            let p = BellBehavior::local_deterministic(&s.f, s.g);
            let q = bell_joint(&p, &[0.5, 0.5], [0.5, 0.5]).unwrap();
            let b = instrumental_from_exo(&exo_map_g(&q, &["A"]).unwrap()).unwrap();
            assert_eq!(b, from_strategy(&s));
        }
    }

    #[test]
    fn zero_probability_conditioning_is_undefined() {
        let p = BellBehavior::local_deterministic(&[0, 0], [0, 0]);
        let q = bell_joint(&p, &[0.5, 0.5], [1.0, 0.0]).unwrap();
        let img = exo_map_g(&q, &["A"]).unwrap();
        assert!(!img.p_obs.is_defined());
        assert!(instrumental_from_exo(&img).is_err());
    }
}
