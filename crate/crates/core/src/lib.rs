//! Shortest paths on conic multi-source, multi-destination graphs.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] holds the immutable-after-freeze [`ConicGraph`] together with
//!   structural validation.
//! * [`dijkstra`] is a textbook heap-based single-source search. It answers
//!   queries and doubles as the reference for the derived structures.
//! * [`contraction`] contracts nodes with a bounded witness search and
//!   produces an [`Overlay`] of shortcuts.
//! * [`invention`] derives destination-to-destination edges from the
//!   absolute difference of adjacent source-edge weights and scores them
//!   against known hidden paths.
//! * [`io`] ingests build matrices, writes DOT/JSON and backs the
//!   `conicroute` command line tool.

pub mod cli;
pub mod contraction;
pub mod dijkstra;
pub mod graph;
pub mod invention;
pub mod io;

pub use contraction::{additive_contract, build_hierarchy, witness_exists, Contractor, Overlay, Shortcut};
pub use dijkstra::{path_to, relax, shortest_paths, PathResult, SearchState};
pub use graph::{ConicGraph, Edge, EdgeId, GraphError, Node, NodeId, NodeKind, Provenance, Weight};
pub use invention::{
    absolute_edge_difference, fitness, invent_all, invent_for_source, triangle_bounds, FitnessReport,
    HiddenPath, InventedEdge, PolicyThreshold, Tolerance,
};
