use std::borrow::Cow;
use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::dijkstra::{path_to, shortest_paths, SearchError};
use crate::graph::{ConicGraph, GraphError, NodeId, NodeKind, Weight};
use crate::invention::{fitness, invent_all, FitnessReport, HiddenPath, InventedEdge, InventionError, PolicyThreshold, Tolerance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("unknown source label {0:?}")]
    UnknownSourceLabel(String),
    #[error("{0:?} is not a source")]
    NotASource(String),
    #[error("no destination is reachable from {0:?}")]
    NoReachableDestination(String),
    #[error(transparent)]
    Invention(#[from] InventionError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("cannot add invented edges: {0}")]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone)]
pub struct QueryOptions {
    /// Report invented alternates next to the best route.
    pub invent: bool,
    /// Let the search traverse invented edges.
    pub use_invented: bool,
    pub policy: Option<PolicyThreshold>,
    pub tolerance: Tolerance,
    pub hidden: Vec<HiddenPath>,
}

impl Default for QueryOptions {
    fn default() -> Self {
        QueryOptions { invent: true, use_invented: false, policy: None, tolerance: Tolerance::default(), hidden: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BestRoute {
    pub destination: String,
    pub distance: Weight,
    pub path: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Alternate {
    pub from: String,
    pub to: String,
    pub weight: Weight,
    pub fitness: Option<FitnessReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryResult {
    pub source: String,
    pub best: BestRoute,
    pub invented_alternates: Vec<Alternate>,
}

/// Answers "nearest destination plus invented alternates" queries over one
/// frozen graph.
#[derive(Debug)]
pub struct QueryEngine<'g> {
    base: &'g ConicGraph,
    search: Cow<'g, ConicGraph>,
    inventions: BTreeMap<NodeId, Vec<InventedEdge>>,
    options: QueryOptions,
}

impl<'g> QueryEngine<'g> {
    pub fn new(graph: &'g ConicGraph, options: QueryOptions) -> Result<Self, QueryError> {
        let inventions = invent_all(graph, options.policy)?;
        let search = if options.use_invented {
            let derived = inventions.values().flatten().map(|e| e.to_edge());
            Cow::Owned(graph.with_derived_edges(derived)?)
        } else {
            Cow::Borrowed(graph)
        };
        Ok(QueryEngine { base: graph, search, inventions, options })
    }

    pub fn inventions(&self) -> &BTreeMap<NodeId, Vec<InventedEdge>> {
        &self.inventions
    }

    fn label(&self, n: NodeId) -> String {
        self.base.label(n).unwrap_or_default().to_owned()
    }

    /// Looks up the invented edge's hidden counterpart and scores it.
    pub fn score(&self, edge: &InventedEdge) -> Option<FitnessReport> {
        let hidden = self.options.hidden.iter().find(|h| h.connects(edge))?;
        fitness(edge, hidden, self.options.tolerance).ok()
    }

    pub fn query(&self, source_label: &str) -> Result<QueryResult, QueryError> {
        let source = self
            .base
            .node_by_label(source_label)
            .ok_or_else(|| QueryError::UnknownSourceLabel(source_label.to_owned()))?;
        self.query_id(source)
    }

    pub fn query_id(&self, source: NodeId) -> Result<QueryResult, QueryError> {
        let node = self.base.node(source).ok_or(SearchError::UnknownNode(source))?;
        if node.kind != NodeKind::Source {
            return Err(QueryError::NotASource(node.label.clone()));
        }
        let state = shortest_paths(&self.search, source, self.options.use_invented)?;
        let best = self
            .base
            .destinations()
            .filter_map(|d| state.distance(d.id).map(|dist| (dist, d.id)))
            .min()
            .ok_or_else(|| QueryError::NoReachableDestination(node.label.clone()))?;
        let path = path_to(&state, best.1)?;
        let invented_alternates = if self.options.invent {
            self.inventions
                .get(&source)
                .into_iter()
                .flatten()
                .map(|e| Alternate { from: self.label(e.from), to: self.label(e.to), weight: e.weight, fitness: self.score(e) })
                .collect()
        } else {
            Vec::new()
        };
        Ok(QueryResult {
            source: node.label.clone(),
            best: BestRoute {
                destination: self.label(best.1),
                distance: best.0,
                path: path.nodes.iter().map(|&n| self.label(n)).collect(),
            },
            invented_alternates,
        })
    }

    /// Queries every source. Sources are split across worker threads; the
    /// results come back in source id order.
    pub fn query_all(&self) -> Vec<(String, Result<QueryResult, QueryError>)> {
        let sources: Vec<NodeId> = self.base.sources().map(|n| n.id).collect();
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(sources.len().max(1));
        let chunk = sources.len().div_ceil(workers).max(1);
        std::thread::scope(|scope| {
            let handles: Vec<_> = sources
                .chunks(chunk)
                .map(|part| scope.spawn(move || part.iter().map(|&s| (self.label(s), self.query_id(s))).collect::<Vec<_>>()))
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("query worker panicked")).collect()
        })
    }
}
