//! Node contraction with witness search.
//!
//! Nodes are contracted one at a time in a caller-supplied order. When `u`
//! is contracted, every pair of remaining neighbours `v -> u -> w` gets a
//! shortcut `v -> w` of weight `w(v,u) + w(u,w)` unless a witness path
//! avoiding `u` is at most that long. Invented edges never take part.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{ConicGraph, Edge, NodeId, Provenance, Weight};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractionError {
    #[error("graph must be frozen before contraction")]
    GraphNotFrozen,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("{0} is already contracted")]
    AlreadyContracted(NodeId),
    #[error("contraction order is not a permutation of the nodes")]
    InvalidOrder,
    #[error("chain must contain at least one edge")]
    EmptyChain,
    #[error("chain weight overflows")]
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Shortcut {
    pub from: NodeId,
    pub to: NodeId,
    pub weight: Weight,
    /// The contracted middle node.
    pub via: NodeId,
}

impl Shortcut {
    pub fn to_edge(self) -> Edge {
        Edge { from: self.from, to: self.to, weight: self.weight, provenance: Provenance::Shortcut }
    }
}

/// Shortcuts produced by a full contraction run, plus the order used.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Overlay {
    pub shortcuts: Vec<Shortcut>,
    pub order: Vec<NodeId>,
}

impl Overlay {
    /// Position of each node in the contraction order.
    pub fn ranks(&self) -> Vec<usize> {
        let mut rank = vec![usize::MAX; self.order.len()];
        for (pos, n) in self.order.iter().enumerate() {
            rank[n.index()] = pos;
        }
        rank
    }

    /// The base graph with every shortcut added.
    pub fn augmented_graph(&self, base: &ConicGraph) -> Result<ConicGraph, crate::graph::GraphError> {
        base.with_derived_edges(self.shortcuts.iter().map(|s| s.to_edge()))
    }

    /// The graph that remains after the first `contracted` nodes of the order
    /// have been removed: original edges between remaining nodes plus the
    /// shortcuts that connect them. Contracted nodes stay as isolated nodes
    /// so ids are unchanged.
    pub fn remainder_graph(&self, base: &ConicGraph, contracted: usize) -> ConicGraph {
        let rank = self.ranks();
        let alive = |n: NodeId| rank[n.index()] >= contracted;
        let mut edges: Vec<Edge> = base
            .edges()
            .iter()
            .filter(|e| e.provenance == Provenance::Original && alive(e.from) && alive(e.to))
            .cloned()
            .collect();
        edges.extend(
            self.shortcuts
                .iter()
                .filter(|s| rank[s.via.index()] < contracted && alive(s.from) && alive(s.to))
                .map(|s| s.to_edge()),
        );
        ConicGraph::from_parts(base.nodes().to_vec(), edges).frozen()
    }
}

/// Collapses a chain of edge weights into a single edge weight.
pub fn additive_contract(chain: &[Weight]) -> Result<Weight, ContractionError> {
    if chain.is_empty() {
        return Err(ContractionError::EmptyChain);
    }
    chain.iter().try_fold(0 as Weight, |acc, &w| acc.checked_add(w)).ok_or(ContractionError::Overflow)
}

/// Whether a path `v -> … -> w` that avoids `excluded` weighs at most
/// `bound`. Invented edges are ignored.
pub fn witness_exists(graph: &ConicGraph, v: NodeId, w: NodeId, bound: Weight, excluded: NodeId) -> bool {
    if !graph.contains(v) || !graph.contains(w) || v == excluded || w == excluded {
        return false;
    }
    let dist = bounded_search(graph.node_count(), v, bound, |u, out| {
        for (_, e) in graph.out_edges(u) {
            if e.provenance != Provenance::Invented && e.to != excluded {
                out.push((e.to, e.weight));
            }
        }
    });
    dist.get(&w).is_some_and(|&d| d <= bound)
}

/// Dijkstra from `start` that stops once the frontier exceeds `bound`.
/// Returns the labels of every node reached within the bound.
fn bounded_search<F>(node_count: usize, start: NodeId, bound: Weight, mut expand: F) -> HashMap<NodeId, Weight>
where
    F: FnMut(NodeId, &mut Vec<(NodeId, Weight)>),
{
    let mut dist: HashMap<NodeId, Weight> = HashMap::new();
    let mut done = vec![false; node_count];
    let mut heap = BinaryHeap::new();
    let mut scratch = Vec::new();
    dist.insert(start, 0);
    heap.push(Reverse((0, start)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > bound {
            break;
        }
        if done[u.index()] {
            continue;
        }
        done[u.index()] = true;
        scratch.clear();
        expand(u, &mut scratch);
        for &(t, weight) in &scratch {
            let nd = d.saturating_add(weight);
            if nd <= bound && dist.get(&t).is_none_or(|&old| nd < old) {
                dist.insert(t, nd);
                heap.push(Reverse((nd, t)));
            }
        }
    }
    dist
}

/// Incremental contraction over a frozen graph.
#[derive(Debug, Clone)]
pub struct Contractor<'g> {
    graph: &'g ConicGraph,
    out: Vec<Vec<(NodeId, Weight)>>,
    incoming: Vec<Vec<(NodeId, Weight)>>,
    contracted: Vec<bool>,
    order: Vec<NodeId>,
    shortcuts: Vec<Shortcut>,
}

impl<'g> Contractor<'g> {
    pub fn new(graph: &'g ConicGraph) -> Result<Self, ContractionError> {
        if !graph.is_frozen() {
            return Err(ContractionError::GraphNotFrozen);
        }
        let n = graph.node_count();
        let mut out = vec![Vec::new(); n];
        let mut incoming = vec![Vec::new(); n];
        for e in graph.edges().iter().filter(|e| e.provenance != Provenance::Invented) {
            out[e.from.index()].push((e.to, e.weight));
            incoming[e.to.index()].push((e.from, e.weight));
        }
        Ok(Contractor { graph, out, incoming, contracted: vec![false; n], order: Vec::new(), shortcuts: Vec::new() })
    }

    pub fn is_contracted(&self, node: NodeId) -> bool {
        self.contracted.get(node.index()).copied().unwrap_or(false)
    }

    /// Contracts `u` and returns the shortcuts this required. Only
    /// neighbours that are still uncontracted take part.
    pub fn contract_node(&mut self, u: NodeId) -> Result<Vec<Shortcut>, ContractionError> {
        if !self.graph.contains(u) {
            return Err(ContractionError::UnknownNode(u));
        }
        if self.contracted[u.index()] {
            return Err(ContractionError::AlreadyContracted(u));
        }
        let ins = lightest_alive(&self.incoming[u.index()], &self.contracted);
        let outs = lightest_alive(&self.out[u.index()], &self.contracted);

        let mut added = Vec::new();
        for &(v, w_in) in &ins {
            let targets: Vec<_> = outs.iter().filter(|&&(w, _)| w != v).copied().collect();
            let Some(max_bound) = targets.iter().map(|&(_, w_out)| w_in + w_out).max() else {
                continue;
            };
            let out = &self.out;
            let contracted = &self.contracted;
            let reach = bounded_search(self.graph.node_count(), v, max_bound, |x, buf| {
                buf.extend(out[x.index()].iter().filter(|(t, _)| *t != u && !contracted[t.index()]).copied());
            });
            for (w, w_out) in targets {
                let weight = w_in + w_out;
                if !reach.get(&w).is_some_and(|&d| d <= weight) {
                    added.push(Shortcut { from: v, to: w, weight, via: u });
                }
            }
        }

        for s in &added {
            self.out[s.from.index()].push((s.to, s.weight));
            self.incoming[s.to.index()].push((s.from, s.weight));
        }
        self.contracted[u.index()] = true;
        self.order.push(u);
        self.shortcuts.extend_from_slice(&added);
        Ok(added)
    }

    pub fn into_overlay(self) -> Overlay {
        Overlay { shortcuts: self.shortcuts, order: self.order }
    }
}

/// Cheapest parallel edge to every uncontracted neighbour, in id order.
fn lightest_alive(adj: &[(NodeId, Weight)], contracted: &[bool]) -> Vec<(NodeId, Weight)> {
    let mut best: HashMap<NodeId, Weight> = HashMap::new();
    for &(n, w) in adj {
        if !contracted[n.index()] {
            best.entry(n).and_modify(|b| *b = (*b).min(w)).or_insert(w);
        }
    }
    let mut v: Vec<_> = best.into_iter().collect();
    v.sort_unstable();
    v
}

/// Contracts every node. `order` defaults to ascending node id.
pub fn build_hierarchy(graph: &ConicGraph, order: Option<&[NodeId]>) -> Result<Overlay, ContractionError> {
    let mut contractor = Contractor::new(graph)?;
    let order: Vec<NodeId> = match order {
        Some(o) => {
            let mut seen = vec![false; graph.node_count()];
            let is_perm = o.len() == graph.node_count()
                && o.iter().all(|n| n.index() < seen.len() && !std::mem::replace(&mut seen[n.index()], true));
            if !is_perm {
                return Err(ContractionError::InvalidOrder);
            }
            o.to_vec()
        }
        None => graph.nodes().iter().map(|n| n.id).collect(),
    };
    for u in order {
        contractor.contract_node(u)?;
    }
    Ok(contractor.into_overlay())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dijkstra::shortest_paths;
    use crate::graph::fixtures::hospital_graph;
    use crate::graph::NodeKind;

    fn graph(labels: &[&str], edges: &[(&str, &str, Weight)]) -> ConicGraph {
        let mut g = ConicGraph::new();
        for (i, l) in labels.iter().enumerate() {
            g.add_node(l, NodeKind::Destination, i as u32).unwrap();
        }
        for &(a, b, w) in edges {
            g.add_edge(g.node_by_label(a).unwrap(), g.node_by_label(b).unwrap(), w).unwrap();
        }
        g.frozen()
    }

    /// v -> u -> w costs 4, v -> x -> y -> w costs 3.
    fn witness_figure() -> ConicGraph {
        graph(
            &["v", "u", "w", "x", "y"],
            &[("v", "u", 2), ("u", "w", 2), ("v", "x", 1), ("x", "y", 1), ("y", "w", 1)],
        )
    }

    fn id(g: &ConicGraph, l: &str) -> NodeId {
        g.node_by_label(l).unwrap()
    }

    #[test]
    fn witness_cases() {
        let g = witness_figure();
        assert!(witness_exists(&g, id(&g, "v"), id(&g, "w"), 4, id(&g, "u")));
        assert!(witness_exists(&g, id(&g, "v"), id(&g, "w"), 3, id(&g, "u")));
        assert!(!witness_exists(&g, id(&g, "v"), id(&g, "w"), 2, id(&g, "u")));

        let lone = graph(&["v", "u", "w"], &[("v", "u", 2), ("u", "w", 2)]);
        assert!(!witness_exists(&lone, id(&lone, "v"), id(&lone, "w"), 100, id(&lone, "u")));

        let direct = graph(&["v", "u", "w"], &[("v", "u", 2), ("u", "w", 2), ("v", "w", 4)]);
        assert!(witness_exists(&direct, id(&direct, "v"), id(&direct, "w"), 4, id(&direct, "u")));
    }

    #[test]
    fn forced_shortcut_on_path() {
        let g = graph(&["a", "b", "c"], &[("a", "b", 2), ("b", "c", 3)]);
        let mut c = Contractor::new(&g).unwrap();
        let got = c.contract_node(id(&g, "b")).unwrap();
        assert_eq!(got, vec![Shortcut { from: id(&g, "a"), to: id(&g, "c"), weight: 5, via: id(&g, "b") }]);
        assert_eq!(c.contract_node(id(&g, "b")), Err(ContractionError::AlreadyContracted(id(&g, "b"))));
    }

    #[test]
    fn witness_suppresses_shortcut() {
        let g = witness_figure();
        let mut c = Contractor::new(&g).unwrap();
        assert!(c.contract_node(id(&g, "u")).unwrap().is_empty());
    }

    #[test]
    fn isolated_node_needs_nothing() {
        let g = graph(&["a", "lonely"], &[]);
        let mut c = Contractor::new(&g).unwrap();
        assert!(c.contract_node(id(&g, "lonely")).unwrap().is_empty());
    }

    #[test]
    fn chain_in_id_order() {
        // middle nodes get the low ids so id order contracts them first
        let g = graph(&["b", "c", "a", "d"], &[("a", "b", 1), ("b", "c", 2), ("c", "d", 4)]);
        let overlay = build_hierarchy(&g, None).unwrap();
        let pairs: Vec<_> = overlay.shortcuts.iter().map(|s| (s.from, s.to, s.weight)).collect();
        assert_eq!(pairs, vec![(id(&g, "a"), id(&g, "c"), 3), (id(&g, "a"), id(&g, "d"), 7)]);
        let aug = overlay.augmented_graph(&g).unwrap();
        let before = shortest_paths(&g, id(&g, "a"), false).unwrap();
        let after = shortest_paths(&aug, id(&g, "a"), true).unwrap();
        assert_eq!(before.distances(), after.distances());
        // with only a and d left, the shortcut alone carries the distance
        let rest = overlay.remainder_graph(&g, 2);
        assert_eq!(shortest_paths(&rest, id(&g, "a"), true).unwrap().distance(id(&g, "d")), Some(7));
    }

    #[test]
    fn hierarchy_edge_cases() {
        assert!(build_hierarchy(&hospital_graph(), None).unwrap().shortcuts.is_empty());
        let empty = ConicGraph::new().frozen();
        assert_eq!(build_hierarchy(&empty, None).unwrap(), Overlay::default());
        assert_eq!(build_hierarchy(&ConicGraph::new(), None), Err(ContractionError::GraphNotFrozen));
        let g = witness_figure();
        assert_eq!(build_hierarchy(&g, Some(&[NodeId(0), NodeId(0)])), Err(ContractionError::InvalidOrder));
    }

    #[test]
    fn additive_chain() {
        assert_eq!(additive_contract(&[1, 2, 3]), Ok(6));
        assert_eq!(additive_contract(&[312]), Ok(312));
        assert_eq!(additive_contract(&[]), Err(ContractionError::EmptyChain));
        assert_eq!(additive_contract(&[Weight::MAX, 1]), Err(ContractionError::Overflow));
        let left = additive_contract(&[100, 200, 300]).unwrap();
        let right = additive_contract(&[150, 150, 150]).unwrap();
        assert_eq!(crate::invention::absolute_edge_difference(left, right), Ok(150));
    }

    proptest::proptest! {
        #[test]
        fn additive_split_anywhere(chain in proptest::collection::vec(1u64..1_000_000, 1..30), cut in 0usize..30) {
            let cut = cut % chain.len();
            let whole = additive_contract(&chain).unwrap();
            let head = if cut == 0 { 0 } else { additive_contract(&chain[..cut]).unwrap() };
            let tail = additive_contract(&chain[cut..]).unwrap();
            proptest::prop_assert_eq!(whole, head + tail);
        }
    }
}
