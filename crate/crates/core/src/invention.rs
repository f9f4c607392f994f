//! Edge invention between adjacent destinations.
//!
//! For each source, destinations are walked in ascending offset order as
//! consecutive pairs. Within a pair the lighter source edge is the selected
//! short path, and a new edge is invented from that destination to its
//! neighbour with weight equal to the absolute difference of the two source
//! edges. Invented edges can then be scored against hidden paths whose real
//! length is known.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::graph::{ConicGraph, Edge, NodeId, NodeKind, Provenance, Weight};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InventionError {
    #[error("graph must be frozen first")]
    GraphNotFrozen,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} is not a source")]
    NotASource(NodeId),
    #[error("weights must be positive")]
    NonPositiveWeight,
    #[error("hidden path endpoints do not match the invented edge")]
    EndpointMismatch,
    #[error("allowable must be positive")]
    InvalidPolicy,
    #[error("invalid tolerance {0:?}")]
    InvalidTolerance(String),
}

/// `|w1 - w2|` for two positive weights.
pub fn absolute_edge_difference(w1: Weight, w2: Weight) -> Result<Weight, InventionError> {
    if w1 == 0 || w2 == 0 {
        return Err(InventionError::NonPositiveWeight);
    }
    Ok(w1.abs_diff(w2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TriangleBounds {
    pub upper: Weight,
    pub lower: Weight,
}

/// Side-length bounds for a triangle with sides `z1` and `z2`: the third side
/// lies in `[|z1 - z2|, z1 + z2]`.
pub fn triangle_bounds(z1: Weight, z2: Weight) -> Result<TriangleBounds, InventionError> {
    let lower = absolute_edge_difference(z1, z2)?;
    let upper = z1.checked_add(z2).ok_or(InventionError::NonPositiveWeight)?;
    Ok(TriangleBounds { upper, lower })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct InventedEdge {
    pub source: NodeId,
    /// Destination reached by the lighter source edge.
    pub from: NodeId,
    /// The adjacent destination.
    pub to: NodeId,
    pub weight: Weight,
    /// `(min, max)` of the two source-edge weights.
    pub pair_weights: (Weight, Weight),
}

impl InventedEdge {
    pub fn to_edge(self) -> Edge {
        Edge { from: self.from, to: self.to, weight: self.weight, provenance: Provenance::Invented }
    }
}

/// Cap on invented edge weights. Inventions heavier than `allowable` are
/// dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PolicyThreshold {
    allowable: Weight,
}

impl PolicyThreshold {
    pub fn new(allowable: Weight) -> Result<Self, InventionError> {
        if allowable == 0 {
            return Err(InventionError::InvalidPolicy);
        }
        Ok(PolicyThreshold { allowable })
    }

    pub fn allowable(&self) -> Weight {
        self.allowable
    }

    pub fn admits(&self, weight: Weight) -> bool {
        weight <= self.allowable
    }
}

/// Counters from one invention pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct InventionStats {
    pub pairs_evaluated: usize,
    pub empty_skipped: usize,
    pub suppressed: usize,
}

/// Inventions for a single source.
pub fn invent_for_source(
    graph: &ConicGraph,
    source: NodeId,
    policy: Option<PolicyThreshold>,
) -> Result<Vec<InventedEdge>, InventionError> {
    invent_for_source_with_stats(graph, source, policy).map(|(edges, _)| edges)
}

/// Like [`invent_for_source`], also reporting how many pairs were looked at.
pub fn invent_for_source_with_stats(
    graph: &ConicGraph,
    source: NodeId,
    policy: Option<PolicyThreshold>,
) -> Result<(Vec<InventedEdge>, InventionStats), InventionError> {
    if !graph.is_frozen() {
        return Err(InventionError::GraphNotFrozen);
    }
    let node = graph.node(source).ok_or(InventionError::UnknownNode(source))?;
    if node.kind != NodeKind::Source {
        return Err(InventionError::NotASource(source));
    }
    let neighbors: Vec<(NodeId, Weight)> = graph
        .neighbors_ascending(source)
        .map_err(|_| InventionError::UnknownNode(source))?
        .into_iter()
        .filter(|&(d, _)| graph.node(d).is_some_and(|n| n.kind == NodeKind::Destination))
        .collect();

    let mut stats = InventionStats::default();
    let mut edges = Vec::new();
    for pair in neighbors.windows(2) {
        let (a, wa) = pair[0];
        let (b, wb) = pair[1];
        stats.pairs_evaluated += 1;
        let weight = wa.abs_diff(wb);
        if weight == 0 {
            stats.empty_skipped += 1;
            continue;
        }
        if policy.is_some_and(|p| !p.admits(weight)) {
            stats.suppressed += 1;
            continue;
        }
        let (from, to) = if wa < wb { (a, b) } else { (b, a) };
        edges.push(InventedEdge { source, from, to, weight, pair_weights: (wa.min(wb), wa.max(wb)) });
    }
    Ok((edges, stats))
}

/// Runs [`invent_for_source`] for every source, keyed by source id.
pub fn invent_all(
    graph: &ConicGraph,
    policy: Option<PolicyThreshold>,
) -> Result<BTreeMap<NodeId, Vec<InventedEdge>>, InventionError> {
    if !graph.is_frozen() {
        return Err(InventionError::GraphNotFrozen);
    }
    graph.sources().map(|s| Ok((s.id, invent_for_source(graph, s.id, policy)?))).collect()
}

/// A known real path between two destinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HiddenPath {
    pub from: NodeId,
    pub to: NodeId,
    pub true_weight: Weight,
}

impl HiddenPath {
    pub fn connects(&self, edge: &InventedEdge) -> bool {
        (self.from == edge.from && self.to == edge.to) || (self.from == edge.to && self.to == edge.from)
    }
}

/// Relative-error tolerance, an exact non-negative rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tolerance(pub Ratio<u64>);

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(Ratio::new(1, 10))
    }
}

impl Tolerance {
    pub fn as_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Tolerance {
    type Err = InventionError;

    /// Accepts `3/40`, `0.075` or `1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || InventionError::InvalidTolerance(s.to_owned());
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: u64 = n.trim().parse().map_err(|_| bad())?;
            let d: u64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            return Ok(Tolerance(Ratio::new(n, d)));
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if (int.is_empty() && frac.is_empty()) || frac.len() > 18 {
            return Err(bad());
        }
        let digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
        if !digits(int) || !digits(frac) {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac_val: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let scale = 10u64.pow(frac.len() as u32);
        let numer = int.checked_mul(scale).and_then(|v| v.checked_add(frac_val)).ok_or_else(bad)?;
        Ok(Tolerance(Ratio::new(numer, scale)))
    }
}

fn ratio_as_f64<S: Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(*r.numer() as f64 / *r.denom() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FitnessReport {
    pub invented_weight: Weight,
    pub hidden_weight: Weight,
    pub absolute_error: Weight,
    #[serde(serialize_with = "ratio_as_f64")]
    pub relative_error: Ratio<u64>,
    pub fit: bool,
}

/// Scores an invented edge against the hidden path between the same two
/// destinations (either direction).
pub fn fitness(invented: &InventedEdge, hidden: &HiddenPath, tolerance: Tolerance) -> Result<FitnessReport, InventionError> {
    if !hidden.connects(invented) {
        return Err(InventionError::EndpointMismatch);
    }
    if hidden.true_weight == 0 {
        return Err(InventionError::NonPositiveWeight);
    }
    let absolute_error = invented.weight.abs_diff(hidden.true_weight);
    let relative_error = Ratio::new(absolute_error, hidden.true_weight);
    Ok(FitnessReport {
        invented_weight: invented.weight,
        hidden_weight: hidden.true_weight,
        absolute_error,
        relative_error,
        fit: relative_error <= tolerance.0,
    })
}
