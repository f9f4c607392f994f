//! Heap-based single-source shortest paths.
//!
//! The search keeps explicit distance labels, predecessor labels, a binary
//! heap frontier and a settled set. Decrease-key is realised by lazy
//! re-insertion: stale heap entries are dropped when popped.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{ConicGraph, Edge, NodeId, Provenance, Weight};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("graph must be frozen before searching")]
    GraphNotFrozen,
    #[error("{0} is unreachable")]
    Unreachable(NodeId),
}

/// Working state of one search.
#[derive(Debug, Clone)]
pub struct SearchState {
    source: NodeId,
    dist: Vec<Option<Weight>>,
    pred: Vec<Option<NodeId>>,
    frontier: BinaryHeap<Reverse<(Weight, NodeId)>>,
    settled: Vec<bool>,
    settle_order: Vec<(NodeId, Weight)>,
}

impl PartialEq for SearchState {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
            && self.dist == other.dist
            && self.pred == other.pred
            && self.settled == other.settled
            && self.settle_order == other.settle_order
            && self.frontier.clone().into_sorted_vec() == other.frontier.clone().into_sorted_vec()
    }
}

impl Eq for SearchState {}

impl SearchState {
    /// Fresh state over `node_count` nodes: every label is infinite except
    /// the source, which is zero and sits alone in the frontier.
    pub fn new(node_count: usize, source: NodeId) -> Self {
        let mut dist = vec![None; node_count];
        dist[source.index()] = Some(0);
        let mut frontier = BinaryHeap::new();
        frontier.push(Reverse((0, source)));
        SearchState {
            source,
            dist,
            pred: vec![None; node_count],
            frontier,
            settled: vec![false; node_count],
            settle_order: Vec::new(),
        }
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    /// Distance label of `node`; `None` stands for infinity.
    pub fn distance(&self, node: NodeId) -> Option<Weight> {
        self.dist.get(node.index()).copied().flatten()
    }

    pub fn distances(&self) -> &[Option<Weight>] {
        &self.dist
    }

    pub fn predecessor(&self, node: NodeId) -> Option<NodeId> {
        self.pred.get(node.index()).copied().flatten()
    }

    pub fn is_settled(&self, node: NodeId) -> bool {
        self.settled.get(node.index()).copied().unwrap_or(false)
    }

    /// Nodes in the order they were extracted from the frontier, with the
    /// distance they were settled at.
    pub fn settle_order(&self) -> &[(NodeId, Weight)] {
        &self.settle_order
    }

    /// EXTRACT-MIN. Equal distances break towards the smaller node id.
    pub fn extract_min(&mut self) -> Option<(NodeId, Weight)> {
        while let Some(Reverse((d, u))) = self.frontier.pop() {
            if self.settled[u.index()] || self.dist[u.index()] != Some(d) {
                continue;
            }
            self.settled[u.index()] = true;
            self.settle_order.push((u, d));
            return Some((u, d));
        }
        None
    }
}

/// Relaxes `edge` against `state`. Returns whether the head's label improved.
pub fn relax(edge: &Edge, state: &mut SearchState) -> bool {
    let Some(tail) = state.distance(edge.from) else {
        return false;
    };
    let Some(candidate) = tail.checked_add(edge.weight) else {
        return false;
    };
    let head = edge.to.index();
    if state.settled[head] || state.dist[head].is_some_and(|d| d <= candidate) {
        return false;
    }
    state.dist[head] = Some(candidate);
    state.pred[head] = Some(edge.from);
    state.frontier.push(Reverse((candidate, edge.to)));
    true
}

/// Runs the search from `source` to completion.
///
/// Only original edges are used unless `use_derived` is set, in which case
/// shortcut and invented edges participate as well.
pub fn shortest_paths(graph: &ConicGraph, source: NodeId, use_derived: bool) -> Result<SearchState, SearchError> {
    if !graph.is_frozen() {
        return Err(SearchError::GraphNotFrozen);
    }
    if !graph.contains(source) {
        return Err(SearchError::UnknownNode(source));
    }
    let mut state = SearchState::new(graph.node_count(), source);
    while let Some((u, _)) = state.extract_min() {
        for (_, edge) in graph.out_edges(u) {
            if use_derived || edge.provenance == Provenance::Original {
                relax(edge, &mut state);
            }
        }
    }
    Ok(state)
}

/// A reconstructed shortest path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathResult {
    pub target: NodeId,
    pub distance: Weight,
    pub nodes: Vec<NodeId>,
}

/// Unwinds predecessor labels from `target` back to the search source.
pub fn path_to(state: &SearchState, target: NodeId) -> Result<PathResult, SearchError> {
    if target.index() >= state.dist.len() {
        return Err(SearchError::UnknownNode(target));
    }
    let distance = state.distance(target).ok_or(SearchError::Unreachable(target))?;
    let mut nodes = vec![target];
    let mut cur = target;
    while let Some(p) = state.predecessor(cur) {
        nodes.push(p);
        cur = p;
    }
    nodes.reverse();
    debug_assert_eq!(nodes[0], state.source);
    Ok(PathResult { target, distance, nodes })
}
