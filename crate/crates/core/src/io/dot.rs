use std::fmt::Write as _;

use crate::contraction::Overlay;
use crate::graph::{ConicGraph, NodeId, NodeKind, Provenance, Weight};
use crate::invention::InventedEdge;

fn is_keyword(s: &str) -> bool {
    ["node", "edge", "graph", "digraph", "subgraph", "strict"].iter().any(|k| k.eq_ignore_ascii_case(s))
}

/// Bare identifier when DOT allows it, quoted otherwise.
fn dot_id(label: &str) -> String {
    let mut chars = label.chars();
    let bare = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_keyword(label);
    if bare {
        label.to_owned()
    } else {
        format!("\"{}\"", label.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

fn style(p: Provenance) -> &'static str {
    match p {
        Provenance::Original => "solid",
        Provenance::Shortcut => "dashed",
        Provenance::Invented => "dotted",
    }
}

/// Renders the graph as a DOT digraph. Original edges are solid, shortcuts
/// dashed and invented edges dotted; every edge carries its weight as label.
/// Output depends only on the inputs.
pub fn export_dot(graph: &ConicGraph, overlay: Option<&Overlay>, invented: Option<&[InventedEdge]>) -> String {
    if graph.node_count() == 0 {
        return "digraph conic {}\n".to_owned();
    }
    let name = |n: NodeId| dot_id(graph.label(n).unwrap_or("?"));
    let mut out = String::from("digraph conic {\n  rankdir=LR;\n");
    for node in graph.nodes() {
        let shape = match node.kind {
            NodeKind::Source => "box",
            NodeKind::Destination => "ellipse",
        };
        let _ = writeln!(out, "  {} [shape={shape}];", dot_id(&node.label));
    }
    let mut edge = |from: NodeId, to: NodeId, weight: Weight, p: Provenance| {
        let _ = writeln!(out, "  {} -> {} [label=\"{weight}\", style={}];", name(from), name(to), style(p));
    };
    for e in graph.edges() {
        edge(e.from, e.to, e.weight, e.provenance);
    }
    for s in overlay.map(|o| o.shortcuts.as_slice()).unwrap_or_default() {
        edge(s.from, s.to, s.weight, Provenance::Shortcut);
    }
    for i in invented.unwrap_or_default() {
        edge(i.from, i.to, i.weight, Provenance::Invented);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::hospital_graph;
    use crate::invention::invent_all;

    #[test]
    fn identifiers() {
        assert_eq!(dot_id("CMC"), "CMC");
        assert_eq!(dot_id("node"), "\"node\"");
        assert_eq!(dot_id("St. Mary's"), "\"St. Mary's\"");
        assert_eq!(dot_id("say \"hi\""), "\"say \\\"hi\\\"\"");
        assert_eq!(dot_id("0"), "\"0\"");
    }

    #[test]
    fn hospital_dot() {
        let g = hospital_graph();
        let inv: Vec<_> = invent_all(&g, None).unwrap().into_values().flatten().collect();
        let dot = export_dot(&g, None, Some(&inv));
        assert!(dot.contains("  CMC -> MC [label=\"459\", style=dotted];"), "{dot}");
        assert!(dot.contains("  Rumuomasi -> CMC [label=\"312\", style=solid];"));
        assert!(dot.contains("  Rumuomasi [shape=box];"));
        assert_eq!(dot, export_dot(&g, None, Some(&inv)));
    }

    #[test]
    fn empty_graph() {
        assert_eq!(export_dot(&ConicGraph::new().frozen(), None, None), "digraph conic {}\n");
    }
}
