//! Graph data model for conic acyclic di-graphs.
//!
//! A [`ConicGraph`] is built incrementally with [`ConicGraph::add_node`] and
//! [`ConicGraph::add_edge`], then frozen. Once frozen it never changes and can
//! be shared freely between threads for read-only queries. Derived edges
//! (shortcuts and invented edges) are layered on with
//! [`ConicGraph::with_derived_edges`], which returns a new frozen graph.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Edge weight. Distances are exact integers, e.g. metres.
pub type Weight = u64;

/// Dense node index, `0..node_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Source,
    Destination,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKind::Source => f.write_str("source"),
            NodeKind::Destination => f.write_str("destination"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub label: String,
    pub kind: NodeKind,
    /// Row (sources) or column (destinations) position in the build matrix.
    pub offset: u32,
}

/// Where an edge came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Original,
    Shortcut,
    Invented,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub weight: Weight,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph is frozen")]
    GraphFrozen,
    #[error("graph must be frozen first")]
    GraphNotFrozen,
    #[error("label must not be empty")]
    EmptyLabel,
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("duplicate {kind} offset {offset}")]
    DuplicateOffset { kind: NodeKind, offset: u32 },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("edge weight must be positive")]
    NonPositiveWeight,
    #[error("self loop on {0}")]
    SelfLoop(NodeId),
    #[error("edge {from} -> {to} already exists")]
    DuplicateEdge { from: NodeId, to: NodeId },
    #[error("source {source_node} already has an edge of weight {weight}")]
    EqualAdjacentWeight { source_node: NodeId, weight: Weight },
    #[error("edge {from} -> {to} would create a cycle")]
    CycleCreated { from: NodeId, to: NodeId },
    #[error("node {0} is not a source")]
    NotASource(NodeId),
}

/// A single structural problem found by [`ConicGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    NonDenseId { position: usize, id: NodeId },
    EmptyLabel { node: NodeId },
    DuplicateLabel { label: String },
    DuplicateOffset { kind: NodeKind, offset: u32 },
    UnknownEndpoint { edge: EdgeId },
    NonPositiveWeight { edge: EdgeId },
    SelfLoop { edge: EdgeId },
    EqualAdjacentWeight { source: NodeId, weight: Weight },
    Cycle { nodes: Vec<NodeId> },
}

impl Violation {
    /// Stable snake_case name of the violation kind.
    pub fn name(&self) -> &'static str {
        match self {
            Violation::NonDenseId { .. } => "NonDenseId",
            Violation::EmptyLabel { .. } => "EmptyLabel",
            Violation::DuplicateLabel { .. } => "DuplicateLabel",
            Violation::DuplicateOffset { .. } => "DuplicateOffset",
            Violation::UnknownEndpoint { .. } => "UnknownEndpoint",
            Violation::NonPositiveWeight { .. } => "NonPositiveWeight",
            Violation::SelfLoop { .. } => "SelfLoop",
            Violation::EqualAdjacentWeight { .. } => "EqualAdjacentWeight",
            Violation::Cycle { .. } => "Cycle",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonDenseId { position, id } => write!(f, "node at position {position} has id {id}"),
            Violation::EmptyLabel { node } => write!(f, "node {node} has an empty label"),
            Violation::DuplicateLabel { label } => write!(f, "label {label:?} is used more than once"),
            Violation::DuplicateOffset { kind, offset } => write!(f, "{kind} offset {offset} is used more than once"),
            Violation::UnknownEndpoint { edge } => write!(f, "edge {} references an unknown node", edge.0),
            Violation::NonPositiveWeight { edge } => write!(f, "edge {} has a non-positive weight", edge.0),
            Violation::SelfLoop { edge } => write!(f, "edge {} is a self loop", edge.0),
            Violation::EqualAdjacentWeight { source, weight } => {
                write!(f, "source {source} has several edges of weight {weight}")
            }
            Violation::Cycle { nodes } => write!(f, "cycle through {} nodes", nodes.len()),
        }
    }
}

/// Outcome of [`ConicGraph::validate`]. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}: {v}", v.name())?;
        }
        Ok(())
    }
}

/// Weighted acyclic di-graph partitioned into sources and destinations.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(try_from = "GraphDump", into = "GraphDump")]
pub struct ConicGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    /// Outgoing edges per node, sorted by (target offset, target id, edge id).
    adjacency: Vec<Vec<EdgeId>>,
    frozen: bool,
    labels: HashMap<String, NodeId>,
    offsets: HashSet<(NodeKind, u32)>,
    original_pairs: HashSet<(NodeId, NodeId)>,
    source_weights: HashSet<(NodeId, Weight)>,
}

impl ConicGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from raw parts without checking anything.
    ///
    /// Node ids are taken as given; use [`ConicGraph::validate`] to find out
    /// whether the result is well formed. Edges with out-of-range endpoints
    /// are kept in the edge list but never show up in the adjacency.
    pub fn from_parts(nodes: Vec<Node>, edges: Vec<Edge>) -> Self {
        let n = nodes.len();
        let mut g = ConicGraph { adjacency: vec![Vec::new(); n], ..Default::default() };
        for node in &nodes {
            g.labels.entry(node.label.clone()).or_insert(node.id);
            g.offsets.insert((node.kind, node.offset));
        }
        g.nodes = nodes;
        for (i, e) in edges.iter().enumerate() {
            if e.from.index() < n && e.to.index() < n {
                g.adjacency[e.from.index()].push(EdgeId(i as u32));
            }
            if e.provenance == Provenance::Original {
                g.original_pairs.insert((e.from, e.to));
            }
        }
        g.edges = edges;
        for node in 0..n {
            let mut adj = std::mem::take(&mut g.adjacency[node]);
            adj.sort_by_key(|&eid| g.adjacency_key(eid));
            g.adjacency[node] = adj;
        }
        for e in &g.edges {
            if e.provenance == Provenance::Original && g.kind_of(e.from) == Some(NodeKind::Source) {
                g.source_weights.insert((e.from, e.weight));
            }
        }
        g
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Makes the graph read-only. Idempotent.
    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn frozen(mut self) -> Self {
        self.freeze();
        self
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.index())
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(id.index())
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    pub fn label(&self, id: NodeId) -> Option<&str> {
        self.node(id).map(|n| n.label.as_str())
    }

    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.labels.get(label).copied()
    }

    fn kind_of(&self, id: NodeId) -> Option<NodeKind> {
        self.node(id).map(|n| n.kind)
    }

    /// Source nodes in ascending id order.
    pub fn sources(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Source)
    }

    /// Destination nodes in ascending id order.
    pub fn destinations(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Destination)
    }

    /// All outgoing edges of `node`, every provenance, in adjacency order.
    pub fn out_edges(&self, node: NodeId) -> impl Iterator<Item = (EdgeId, &Edge)> + '_ {
        self.adjacency
            .get(node.index())
            .into_iter()
            .flatten()
            .map(move |&eid| (eid, &self.edges[eid.index()]))
    }

    pub fn add_node(&mut self, label: &str, kind: NodeKind, offset: u32) -> Result<NodeId, GraphError> {
        if self.frozen {
            return Err(GraphError::GraphFrozen);
        }
        if label.is_empty() {
            return Err(GraphError::EmptyLabel);
        }
        if self.labels.contains_key(label) {
            return Err(GraphError::DuplicateLabel(label.to_owned()));
        }
        if self.offsets.contains(&(kind, offset)) {
            return Err(GraphError::DuplicateOffset { kind, offset });
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node { id, label: label.to_owned(), kind, offset });
        self.adjacency.push(Vec::new());
        self.labels.insert(label.to_owned(), id);
        self.offsets.insert((kind, offset));
        Ok(id)
    }

    /// Adds an original edge.
    pub fn add_edge(&mut self, from: NodeId, to: NodeId, weight: Weight) -> Result<EdgeId, GraphError> {
        if self.frozen {
            return Err(GraphError::GraphFrozen);
        }
        self.check_endpoints(from, to, weight)?;
        if self.original_pairs.contains(&(from, to)) {
            return Err(GraphError::DuplicateEdge { from, to });
        }
        let from_is_source = self.kind_of(from) == Some(NodeKind::Source);
        if from_is_source && self.source_weights.contains(&(from, weight)) {
            return Err(GraphError::EqualAdjacentWeight { source_node: from, weight });
        }
        if self.reaches(to, from) {
            return Err(GraphError::CycleCreated { from, to });
        }
        self.original_pairs.insert((from, to));
        if from_is_source {
            self.source_weights.insert((from, weight));
        }
        Ok(self.push_edge(Edge { from, to, weight, provenance: Provenance::Original }))
    }

    /// Returns a new frozen graph with the given derived edges appended.
    ///
    /// Derived edges skip the per-source weight and duplicate checks that
    /// apply to originals, but still must be positive and must not close a
    /// cycle.
    pub fn with_derived_edges<I>(&self, derived: I) -> Result<ConicGraph, GraphError>
    where
        I: IntoIterator<Item = Edge>,
    {
        if !self.frozen {
            return Err(GraphError::GraphNotFrozen);
        }
        let mut g = self.clone();
        for e in derived {
            g.check_endpoints(e.from, e.to, e.weight)?;
            if g.reaches(e.to, e.from) {
                return Err(GraphError::CycleCreated { from: e.from, to: e.to });
            }
            g.push_edge(e);
        }
        Ok(g)
    }

    /// Original out-edges of `node` as (target, weight), ascending by target
    /// offset. Empty for sinks.
    pub fn neighbors_ascending(&self, node: NodeId) -> Result<Vec<(NodeId, Weight)>, GraphError> {
        if !self.contains(node) {
            return Err(GraphError::UnknownNode(node));
        }
        Ok(self
            .out_edges(node)
            .filter(|(_, e)| e.provenance == Provenance::Original)
            .map(|(_, e)| (e.to, e.weight))
            .collect())
    }

    /// Checks every structural invariant and reports all violations found.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.nodes.len();

        let mut seen_labels = HashSet::new();
        let mut reported_labels = HashSet::new();
        let mut seen_offsets = HashSet::new();
        let mut reported_offsets = HashSet::new();
        for (pos, node) in self.nodes.iter().enumerate() {
            if node.id.index() != pos {
                violations.push(Violation::NonDenseId { position: pos, id: node.id });
            }
            if node.label.is_empty() {
                violations.push(Violation::EmptyLabel { node: node.id });
            } else if !seen_labels.insert(node.label.as_str()) && reported_labels.insert(node.label.as_str()) {
                violations.push(Violation::DuplicateLabel { label: node.label.clone() });
            }
            let key = (node.kind, node.offset);
            if !seen_offsets.insert(key) && reported_offsets.insert(key) {
                violations.push(Violation::DuplicateOffset { kind: node.kind, offset: node.offset });
            }
        }

        let mut source_weights = HashSet::new();
        let mut reported_weights = HashSet::new();
        for (i, e) in self.edges.iter().enumerate() {
            let eid = EdgeId(i as u32);
            if e.from.index() >= n || e.to.index() >= n {
                violations.push(Violation::UnknownEndpoint { edge: eid });
                continue;
            }
            if e.weight == 0 {
                violations.push(Violation::NonPositiveWeight { edge: eid });
            }
            if e.from == e.to {
                violations.push(Violation::SelfLoop { edge: eid });
            }
            if e.provenance == Provenance::Original
                && self.nodes[e.from.index()].kind == NodeKind::Source
                && !source_weights.insert((e.from, e.weight))
                && reported_weights.insert((e.from, e.weight))
            {
                violations.push(Violation::EqualAdjacentWeight { source: e.from, weight: e.weight });
            }
        }

        if let Some(nodes) = self.find_cycle() {
            violations.push(Violation::Cycle { nodes });
        }
        ValidationReport { violations }
    }

    fn check_endpoints(&self, from: NodeId, to: NodeId, weight: Weight) -> Result<(), GraphError> {
        if !self.contains(from) {
            return Err(GraphError::UnknownNode(from));
        }
        if !self.contains(to) {
            return Err(GraphError::UnknownNode(to));
        }
        if from == to {
            return Err(GraphError::SelfLoop(from));
        }
        if weight == 0 {
            return Err(GraphError::NonPositiveWeight);
        }
        Ok(())
    }

    fn adjacency_key(&self, eid: EdgeId) -> (u32, NodeId, EdgeId) {
        let to = self.edges[eid.index()].to;
        (self.nodes.get(to.index()).map_or(u32::MAX, |n| n.offset), to, eid)
    }

    fn push_edge(&mut self, edge: Edge) -> EdgeId {
        let eid = EdgeId(self.edges.len() as u32);
        let from = edge.from.index();
        self.edges.push(edge);
        let key = self.adjacency_key(eid);
        let pos = self.adjacency[from].partition_point(|&other| self.adjacency_key(other) <= key);
        self.adjacency[from].insert(pos, eid);
        eid
    }

    /// Whether `target` is reachable from `start` over any edge.
    fn reaches(&self, start: NodeId, target: NodeId) -> bool {
        if start == target {
            return true;
        }
        if self.adjacency[start.index()].is_empty() {
            return false;
        }
        let mut visited = vec![false; self.nodes.len()];
        let mut stack = vec![start];
        visited[start.index()] = true;
        while let Some(u) = stack.pop() {
            for (_, e) in self.out_edges(u) {
                if e.to == target {
                    return true;
                }
                if !visited[e.to.index()] {
                    visited[e.to.index()] = true;
                    stack.push(e.to);
                }
            }
        }
        false
    }

    /// Kahn's algorithm; returns the nodes left over when a cycle exists.
    fn find_cycle(&self) -> Option<Vec<NodeId>> {
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        for adj in &self.adjacency {
            for &eid in adj {
                indegree[self.edges[eid.index()].to.index()] += 1;
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut removed = 0;
        while let Some(v) = queue.pop() {
            removed += 1;
            for &eid in &self.adjacency[v] {
                let t = self.edges[eid.index()].to.index();
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    queue.push(t);
                }
            }
        }
        (removed < n).then(|| (0..n).filter(|&v| indegree[v] > 0).map(|v| NodeId(v as u32)).collect())
    }
}

impl PartialEq for ConicGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges && self.frozen == other.frozen
    }
}

impl Eq for ConicGraph {}

#[derive(Serialize, Deserialize)]
struct GraphDump {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

impl From<ConicGraph> for GraphDump {
    fn from(g: ConicGraph) -> Self {
        GraphDump { nodes: g.nodes, edges: g.edges }
    }
}

impl TryFrom<GraphDump> for ConicGraph {
    type Error = String;

    fn try_from(dump: GraphDump) -> Result<Self, Self::Error> {
        let g = ConicGraph::from_parts(dump.nodes, dump.edges);
        let report = g.validate();
        if report.is_valid() {
            Ok(g.frozen())
        } else {
            Err(format!("invalid graph: {report}"))
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// The four-community, eight-hospital transition matrix.
    pub const TABLE: &[(&str, &[(&str, Weight)])] = &[
        ("Rumuomasi", &[("CMC", 312), ("MC", 771)]),
        ("Runmuogba", &[("PC", 374), ("SC", 382)]),
        ("Woji", &[("PI", 966), ("CU", 472)]),
        ("Ogunabali", &[("OC", 384), ("HC", 438)]),
    ];
    pub const DESTINATIONS: &[&str] = &["CMC", "MC", "PC", "SC", "PI", "CU", "OC", "HC"];

    pub fn hospital_graph() -> ConicGraph {
        let mut g = ConicGraph::new();
        for (row, (label, _)) in TABLE.iter().enumerate() {
            g.add_node(label, NodeKind::Source, row as u32).unwrap();
        }
        for (col, label) in DESTINATIONS.iter().enumerate() {
            g.add_node(label, NodeKind::Destination, col as u32 + 1).unwrap();
        }
        for (label, cells) in TABLE {
            let s = g.node_by_label(label).unwrap();
            for (dest, w) in cells.iter() {
                let d = g.node_by_label(dest).unwrap();
                g.add_edge(s, d, *w).unwrap();
            }
        }
        g.frozen()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::hospital_graph;
    use super::*;
    use proptest::prelude::*;

    fn id(g: &ConicGraph, label: &str) -> NodeId {
        g.node_by_label(label).unwrap()
    }

    #[test]
    fn add_node_assigns_dense_ids() {
        let mut g = ConicGraph::new();
        assert_eq!(g.add_node("Rumuomasi", NodeKind::Source, 0), Ok(NodeId(0)));
        assert_eq!(g.add_node("CMC", NodeKind::Destination, 1), Ok(NodeId(1)));
        assert_eq!(
            g.add_node("CMC", NodeKind::Destination, 9),
            Err(GraphError::DuplicateLabel("CMC".into()))
        );
        assert_eq!(
            g.add_node("MC", NodeKind::Destination, 1),
            Err(GraphError::DuplicateOffset { kind: NodeKind::Destination, offset: 1 })
        );
        // offsets are unique per kind only
        assert_eq!(g.add_node("Woji", NodeKind::Source, 1), Ok(NodeId(2)));
        assert_eq!(g.add_node("", NodeKind::Source, 7), Err(GraphError::EmptyLabel));
    }

    #[test]
    fn add_edge_errors() {
        let mut g = ConicGraph::new();
        let s = g.add_node("Rumuomasi", NodeKind::Source, 0).unwrap();
        let cmc = g.add_node("CMC", NodeKind::Destination, 1).unwrap();
        let mc = g.add_node("MC", NodeKind::Destination, 2).unwrap();
        assert!(g.add_edge(s, cmc, 312).is_ok());
        assert_eq!(g.add_edge(s, mc, 0), Err(GraphError::NonPositiveWeight));
        assert_eq!(
            g.add_edge(s, mc, 312),
            Err(GraphError::EqualAdjacentWeight { source_node: s, weight: 312 })
        );
        assert_eq!(g.add_edge(s, NodeId(9), 5), Err(GraphError::UnknownNode(NodeId(9))));
        assert_eq!(g.add_edge(s, s, 5), Err(GraphError::SelfLoop(s)));
        assert_eq!(g.add_edge(s, cmc, 5), Err(GraphError::DuplicateEdge { from: s, to: cmc }));
        g.add_edge(cmc, mc, 10).unwrap();
        assert_eq!(g.add_edge(mc, s, 10), Err(GraphError::CycleCreated { from: mc, to: s }));
        g.freeze();
        assert_eq!(g.add_edge(s, mc, 771), Err(GraphError::GraphFrozen));
        assert_eq!(g.add_node("X", NodeKind::Source, 3), Err(GraphError::GraphFrozen));
    }

    #[test]
    fn equal_weights_allowed_across_sources() {
        let mut g = ConicGraph::new();
        let a = g.add_node("a", NodeKind::Source, 0).unwrap();
        let b = g.add_node("b", NodeKind::Source, 1).unwrap();
        let d = g.add_node("d", NodeKind::Destination, 1).unwrap();
        g.add_edge(a, d, 7).unwrap();
        g.add_edge(b, d, 7).unwrap();
    }

    #[test]
    fn neighbors_follow_offsets() {
        let g = hospital_graph();
        assert_eq!(
            g.neighbors_ascending(id(&g, "Rumuomasi")).unwrap(),
            vec![(id(&g, "CMC"), 312), (id(&g, "MC"), 771)]
        );
        assert_eq!(
            g.neighbors_ascending(id(&g, "Woji")).unwrap(),
            vec![(id(&g, "PI"), 966), (id(&g, "CU"), 472)]
        );
        assert_eq!(g.neighbors_ascending(id(&g, "CMC")).unwrap(), vec![]);
        assert_eq!(g.neighbors_ascending(NodeId(99)), Err(GraphError::UnknownNode(NodeId(99))));
    }

    #[test]
    fn neighbors_sorted_even_when_inserted_backwards() {
        let mut g = ConicGraph::new();
        let s = g.add_node("s", NodeKind::Source, 0).unwrap();
        let ds: Vec<_> = (1..=5).map(|o| g.add_node(&format!("d{o}"), NodeKind::Destination, o).unwrap()).collect();
        for (i, &d) in ds.iter().enumerate().rev() {
            g.add_edge(s, d, 10 + i as Weight).unwrap();
        }
        let got: Vec<_> = g.neighbors_ascending(s).unwrap().into_iter().map(|(d, _)| d).collect();
        assert_eq!(got, ds);
    }

    #[test]
    fn hospital_graph_is_valid() {
        let g = hospital_graph();
        assert_eq!(g.node_count(), 12);
        assert_eq!(g.edge_count(), 8);
        assert!(g.validate().is_valid(), "{}", g.validate());
    }

    #[test]
    fn validate_reports_injected_problems() {
        let g = hospital_graph();
        let mut edges = g.edges().to_vec();
        edges[0].weight = 0;
        let report = ConicGraph::from_parts(g.nodes().to_vec(), edges).validate();
        let names: Vec<_> = report.violations.iter().map(Violation::name).collect();
        assert_eq!(names, ["NonPositiveWeight"]);

        let mut edges = g.edges().to_vec();
        edges[1].weight = edges[0].weight;
        let report = ConicGraph::from_parts(g.nodes().to_vec(), edges).validate();
        let names: Vec<_> = report.violations.iter().map(Violation::name).collect();
        assert_eq!(names, ["EqualAdjacentWeight"]);

        let mut nodes = g.nodes().to_vec();
        nodes[5].label = nodes[4].label.clone();
        nodes[6].offset = nodes[7].offset;
        let mut edges = g.edges().to_vec();
        edges.push(Edge { from: NodeId(4), to: NodeId(0), weight: 3, provenance: Provenance::Original });
        edges.push(Edge { from: NodeId(3), to: NodeId(42), weight: 3, provenance: Provenance::Original });
        let report = ConicGraph::from_parts(nodes, edges).validate();
        let names: Vec<_> = report.violations.iter().map(Violation::name).collect();
        assert_eq!(names, ["DuplicateLabel", "DuplicateOffset", "UnknownEndpoint", "Cycle"]);
    }

    #[test]
    fn derived_edges_layer_on_frozen_graph() {
        let g = hospital_graph();
        let cmc = id(&g, "CMC");
        let mc = id(&g, "MC");
        let edge = Edge { from: cmc, to: mc, weight: 459, provenance: Provenance::Invented };
        let unfrozen = ConicGraph::new();
        assert_eq!(unfrozen.with_derived_edges([]).unwrap_err(), GraphError::GraphNotFrozen);
        let aug = g.with_derived_edges([edge.clone()]).unwrap();
        assert!(aug.is_frozen());
        assert_eq!(aug.edge_count(), 9);
        // originals only
        assert!(aug.neighbors_ascending(cmc).unwrap().is_empty());
        let back = Edge { from: mc, to: cmc, weight: 1, provenance: Provenance::Invented };
        assert_eq!(
            g.with_derived_edges([edge, back]).unwrap_err(),
            GraphError::CycleCreated { from: mc, to: cmc }
        );
    }

    #[test]
    fn json_dump_round_trips() {
        let g = hospital_graph();
        let text = serde_json::to_string(&g).unwrap();
        let back: ConicGraph = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.node_by_label("HC"), g.node_by_label("HC"));
    }

    #[test]
    fn frozen_graph_is_shareable() {
        fn assert_sync<T: Send + Sync>() {}
        assert_sync::<ConicGraph>();
    }

    prop_compose! {
        fn random_dag()(n in 1usize..14)
            (n in Just(n), raw in prop::collection::vec((0usize..14, 0usize..14, 1u64..1000), 0..40))
            -> ConicGraph
        {
            let mut g = ConicGraph::new();
            for i in 0..n {
                let kind = if i % 3 == 0 { NodeKind::Source } else { NodeKind::Destination };
                g.add_node(&format!("n{i}"), kind, ((i * 7) % 17) as u32).ok();
            }
            let n = g.node_count();
            for (a, b, w) in raw {
                let (a, b) = (a % n, b % n);
                if a < b {
                    let _ = g.add_edge(NodeId(a as u32), NodeId(b as u32), w);
                }
            }
            g.frozen()
        }
    }

    proptest! {
        #[test]
        fn neighbors_strictly_ascending(g in random_dag()) {
            for node in g.nodes() {
                let offs: Vec<_> = g.neighbors_ascending(node.id).unwrap()
                    .into_iter()
                    .map(|(t, _)| (g.node(t).unwrap().offset, t))
                    .collect();
                prop_assert!(offs.windows(2).all(|w| w[0] < w[1]));
            }
        }

        #[test]
        fn add_only_graphs_validate(g in random_dag()) {
            prop_assert!(g.validate().is_valid());
        }

        #[test]
        fn frozen_rejects_all_mutation(g in random_dag()) {
            let mut g = g;
            prop_assert_eq!(g.add_node("fresh", NodeKind::Destination, 1000), Err(GraphError::GraphFrozen));
            prop_assert_eq!(g.add_edge(NodeId(0), NodeId(0), 1), Err(GraphError::GraphFrozen));
        }
    }
}
