//! Random graph generators and brute-force reference computations shared by
//! the integration and acceptance tests. Nothing here calls into the search
//! or contraction code under test.
#![allow(dead_code)]

use conicroute::{ConicGraph, GraphError, NodeId, NodeKind, Provenance, Weight};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

/// Random DAG with `n` nodes and positive integer weights in `1..=max_weight`.
///
/// Node ids are a shuffle of the topological order so that id order and
/// topological order disagree. Roughly one node in four is a source; sources
/// get per-source distinct weights as the graph requires.
pub fn random_dag(seed: u64, n: usize, density: f64, max_weight: Weight) -> ConicGraph {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut g = ConicGraph::new();
    for i in 0..n {
        let kind = if rng.gen_bool(0.25) { NodeKind::Source } else { NodeKind::Destination };
        g.add_node(&format!("n{i}"), kind, i as u32).unwrap();
    }
    let mut topo: Vec<usize> = (0..n).collect();
    topo.shuffle(&mut rng);
    for a in 0..n {
        for b in a + 1..n {
            if !rng.gen_bool(density) {
                continue;
            }
            let (from, to) = (NodeId(topo[a] as u32), NodeId(topo[b] as u32));
            for _ in 0..32 {
                match g.add_edge(from, to, rng.gen_range(1..=max_weight)) {
                    Err(GraphError::EqualAdjacentWeight { .. }) => continue,
                    other => {
                        other.unwrap();
                        break;
                    }
                }
            }
        }
    }
    g.frozen()
}

/// Outgoing (target, weight) lists, optionally including derived edges.
fn adjacency(g: &ConicGraph, use_derived: bool) -> Vec<Vec<(usize, Weight)>> {
    let mut adj = vec![Vec::new(); g.node_count()];
    for e in g.edges() {
        if use_derived || e.provenance == Provenance::Original {
            adj[e.from.index()].push((e.to.index(), e.weight));
        }
    }
    adj
}

/// Minimum weight over every simple path from `source`, by exhaustive
/// depth-first enumeration. `avoid` nodes are never entered.
pub fn enumerate_min_distances(g: &ConicGraph, source: NodeId, use_derived: bool, avoid: &[NodeId]) -> Vec<Option<Weight>> {
    let adj = adjacency(g, use_derived);
    let n = g.node_count();
    let mut best = vec![None; n];
    let mut on_path = vec![false; n];
    for a in avoid {
        on_path[a.index()] = true;
    }
    if on_path[source.index()] {
        return best;
    }
    fn dfs(u: usize, d: Weight, adj: &[Vec<(usize, Weight)>], on_path: &mut [bool], best: &mut [Option<Weight>]) {
        if best[u].is_none_or(|b| d < b) {
            best[u] = Some(d);
        }
        on_path[u] = true;
        for &(t, w) in &adj[u] {
            if !on_path[t] {
                dfs(t, d + w, adj, on_path, best);
            }
        }
        on_path[u] = false;
    }
    dfs(source.index(), 0, &adj, &mut on_path, &mut best);
    best
}

/// Plain O(n^2) label-setting search without a heap, as a second reference
/// for graphs too large to enumerate.
pub fn array_dijkstra(g: &ConicGraph, source: NodeId, use_derived: bool) -> Vec<Option<Weight>> {
    let adj = adjacency(g, use_derived);
    let n = g.node_count();
    let mut dist: Vec<Option<Weight>> = vec![None; n];
    let mut done = vec![false; n];
    dist[source.index()] = Some(0);
    loop {
        let next = (0..n).filter(|&v| !done[v]).filter_map(|v| dist[v].map(|d| (d, v))).min();
        let Some((d, u)) = next else { break };
        done[u] = true;
        for &(t, w) in &adj[u] {
            if dist[t].is_none_or(|old| d + w < old) {
                dist[t] = Some(d + w);
            }
        }
    }
    dist
}

/// One source, `n` destinations, pairwise distinct weights in random order.
pub fn wide_source(seed: u64, n: usize) -> (ConicGraph, NodeId) {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut weights: Vec<Weight> = (1..=(2 * n as Weight)).collect();
    weights.shuffle(&mut rng);
    let mut g = ConicGraph::new();
    let s = g.add_node("s", NodeKind::Source, 0).unwrap();
    for (i, &w) in weights.iter().take(n).enumerate() {
        let d = g.add_node(&format!("d{i}"), NodeKind::Destination, i as u32 + 1).unwrap();
        g.add_edge(s, d, w).unwrap();
    }
    (g.frozen(), s)
}

pub fn hospitals_csv() -> &'static str {
    include_str!("../../fixtures/hospitals.csv")
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}
