//! Build-matrix CSV: sources row-wise, destinations column-wise, cells are
//! edge distances.
//!
//! ```text
//! destinations,CMC,MC,PC
//! offsets,1,2,3
//! Rumuomasi,0,312,771,
//! Runmuogba,1,,,374
//! ```

use std::fmt::Write as _;

use serde::Serialize;

use crate::graph::{ConicGraph, Edge, Node, NodeId, NodeKind, Provenance, ValidationReport, Weight};

use super::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatrixRow {
    pub source_label: String,
    pub source_offset: u32,
    /// One entry per destination column; `None` means no edge.
    pub cells: Vec<Option<Weight>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BuildMatrix {
    pub destination_labels: Vec<String>,
    pub destination_offsets: Vec<u32>,
    pub rows: Vec<MatrixRow>,
}

impl BuildMatrix {
    pub fn populated_cells(&self) -> usize {
        self.rows.iter().map(|r| r.cells.iter().flatten().count()).sum()
    }

    /// Re-emits the matrix in the CSV dialect accepted by
    /// [`parse_build_matrix`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from("destinations");
        for l in &self.destination_labels {
            out.push(',');
            out.push_str(l);
        }
        out.push_str("\noffsets");
        for o in &self.destination_offsets {
            let _ = write!(out, ",{o}");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{},{}", row.source_label, row.source_offset);
            for c in &row.cells {
                out.push(',');
                if let Some(w) = c {
                    let _ = write!(out, "{w}");
                }
            }
            out.push('\n');
        }
        out
    }

    /// Reads the original source-to-destination edges of `graph` back into
    /// matrix form. Returns `None` if the graph holds original edges that do
    /// not fit a matrix (anything other than one source-to-destination edge
    /// per cell).
    pub fn from_graph(graph: &ConicGraph) -> Option<BuildMatrix> {
        let mut dests: Vec<&Node> = graph.destinations().collect();
        dests.sort_by_key(|n| n.offset);
        let mut sources: Vec<&Node> = graph.sources().collect();
        sources.sort_by_key(|n| n.offset);
        let mut column = vec![usize::MAX; graph.node_count()];
        for (c, d) in dests.iter().enumerate() {
            column[d.id.index()] = c;
        }
        let mut row_of = vec![usize::MAX; graph.node_count()];
        for (r, s) in sources.iter().enumerate() {
            row_of[s.id.index()] = r;
        }
        let mut rows: Vec<MatrixRow> = sources
            .iter()
            .map(|s| MatrixRow { source_label: s.label.clone(), source_offset: s.offset, cells: vec![None; dests.len()] })
            .collect();
        for e in graph.edges().iter().filter(|e| e.provenance == Provenance::Original) {
            let (r, c) = (row_of[e.from.index()], column[e.to.index()]);
            if r == usize::MAX || c == usize::MAX || rows[r].cells[c].is_some() {
                return None;
            }
            rows[r].cells[c] = Some(e.weight);
        }
        Some(BuildMatrix {
            destination_labels: dests.iter().map(|d| d.label.clone()).collect(),
            destination_offsets: dests.iter().map(|d| d.offset).collect(),
            rows,
        })
    }
}

fn err(line: u64, kind: ParseErrorKind) -> ParseError {
    ParseError { line: line as usize, kind }
}

fn record_line(record: &csv::StringRecord, fallback: u64) -> u64 {
    record.position().map_or(fallback, |p| p.line())
}

fn parse_offset(text: &str, line: u64) -> Result<u32, ParseError> {
    text.parse().map_err(|_| err(line, ParseErrorKind::NonIntegerCell(text.to_owned())))
}

fn check_increasing(prev: Option<u32>, next: u32, line: u64) -> Result<(), ParseError> {
    match prev {
        Some(p) if p == next => Err(err(line, ParseErrorKind::DuplicateOffset(next))),
        Some(p) if p > next => Err(err(line, ParseErrorKind::NonIncreasingOffset(next))),
        _ => Ok(()),
    }
}

/// Parses the build-matrix CSV. Blank cells are absent edges. Zero cells are
/// accepted here and rejected when the graph is validated.
pub fn parse_build_matrix(text: &str) -> Result<BuildMatrix, ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let mut next = |expected_line: u64| -> Result<Option<csv::StringRecord>, ParseError> {
        match records.next() {
            None => Ok(None),
            Some(Ok(r)) => Ok(Some(r)),
            Some(Err(e)) => {
                let line = e.position().map_or(expected_line, |p| p.line());
                Err(err(line, ParseErrorKind::Csv(e.to_string())))
            }
        }
    };

    let header = next(1)?.ok_or_else(|| err(1, ParseErrorKind::MalformedHeader("missing destinations line".into())))?;
    let header_line = record_line(&header, 1);
    if header.get(0) != Some("destinations") {
        return Err(err(header_line, ParseErrorKind::MalformedHeader("expected `destinations,...`".into())));
    }
    let destination_labels: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    if destination_labels.iter().any(String::is_empty) {
        return Err(err(header_line, ParseErrorKind::MalformedHeader("empty destination label".into())));
    }

    let offsets = next(header_line + 1)?
        .ok_or_else(|| err(header_line + 1, ParseErrorKind::MalformedHeader("missing offsets line".into())))?;
    let offsets_line = record_line(&offsets, header_line + 1);
    if offsets.get(0) != Some("offsets") {
        return Err(err(offsets_line, ParseErrorKind::MalformedHeader("expected `offsets,...`".into())));
    }
    if offsets.len() - 1 != destination_labels.len() {
        return Err(err(
            offsets_line,
            ParseErrorKind::RaggedRow { expected: destination_labels.len(), found: offsets.len() - 1 },
        ));
    }
    let mut destination_offsets = Vec::with_capacity(destination_labels.len());
    for field in offsets.iter().skip(1) {
        let o = parse_offset(field, offsets_line)?;
        check_increasing(destination_offsets.last().copied(), o, offsets_line)?;
        destination_offsets.push(o);
    }

    let mut rows: Vec<MatrixRow> = Vec::new();
    let mut last_line = offsets_line;
    while let Some(record) = next(last_line + 1)? {
        let line = record_line(&record, last_line + 1);
        last_line = line;
        let found = record.len().saturating_sub(2);
        if record.len() < 2 || found != destination_labels.len() {
            return Err(err(line, ParseErrorKind::RaggedRow { expected: destination_labels.len(), found }));
        }
        let label = &record[0];
        if label.is_empty() {
            return Err(err(line, ParseErrorKind::EmptyLabel));
        }
        let offset = parse_offset(&record[1], line)?;
        check_increasing(rows.last().map(|r| r.source_offset), offset, line)?;
        let cells = record
            .iter()
            .skip(2)
            .map(|c| {
                if c.is_empty() {
                    Ok(None)
                } else {
                    c.parse::<Weight>().map(Some).map_err(|_| err(line, ParseErrorKind::NonIntegerCell(c.to_owned())))
                }
            })
            .collect::<Result<_, _>>()?;
        rows.push(MatrixRow { source_label: label.to_owned(), source_offset: offset, cells });
    }

    Ok(BuildMatrix { destination_labels, destination_offsets, rows })
}

/// Assembles the graph without validating it. Sources come first (row
/// order), then destinations (column order); edges are row-major.
pub fn to_graph_unchecked(matrix: &BuildMatrix) -> ConicGraph {
    let mut nodes = Vec::new();
    for row in &matrix.rows {
        nodes.push(Node {
            id: NodeId(nodes.len() as u32),
            label: row.source_label.clone(),
            kind: NodeKind::Source,
            offset: row.source_offset,
        });
    }
    let first_dest = nodes.len();
    for (label, &offset) in matrix.destination_labels.iter().zip(&matrix.destination_offsets) {
        nodes.push(Node { id: NodeId(nodes.len() as u32), label: label.clone(), kind: NodeKind::Destination, offset });
    }
    let mut edges = Vec::new();
    for (r, row) in matrix.rows.iter().enumerate() {
        for (c, cell) in row.cells.iter().enumerate() {
            if let Some(w) = cell {
                edges.push(Edge {
                    from: NodeId(r as u32),
                    to: NodeId((first_dest + c) as u32),
                    weight: *w,
                    provenance: Provenance::Original,
                });
            }
        }
    }
    ConicGraph::from_parts(nodes, edges)
}

/// One source node per row, one destination per column, one original edge
/// per populated cell. The result is validated and frozen.
pub fn to_graph(matrix: &BuildMatrix) -> Result<ConicGraph, ValidationReport> {
    let graph = to_graph_unchecked(matrix);
    let report = graph.validate();
    if report.is_valid() {
        Ok(graph.frozen())
    } else {
        Err(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Violation;
    use proptest::prelude::*;

    pub const HOSPITALS: &str = include_str!("../../fixtures/hospitals.csv");

    #[test]
    fn hospital_fixture() {
        let m = parse_build_matrix(HOSPITALS).unwrap();
        assert_eq!(m.destination_labels.len(), 8);
        assert_eq!(m.rows.len(), 4);
        assert_eq!(m.populated_cells(), 8);
        let g = to_graph(&m).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (12, 8));
        assert!(g.is_frozen());
        let w = g.node_by_label("Woji").unwrap();
        let labels: Vec<_> = g
            .neighbors_ascending(w)
            .unwrap()
            .into_iter()
            .map(|(d, wt)| (g.label(d).unwrap().to_owned(), wt))
            .collect();
        assert_eq!(labels, vec![("PI".to_owned(), 966), ("CU".to_owned(), 472)]);
    }

    #[test]
    fn header_only_is_empty() {
        let m = parse_build_matrix("destinations,A,B\noffsets,1,2\n").unwrap();
        assert!(m.rows.is_empty());
        let g = to_graph(&m).unwrap();
        assert_eq!(g.edge_count(), 0);
        let empty = to_graph(&BuildMatrix::default()).unwrap();
        assert_eq!(empty.node_count(), 0);
        assert!(empty.is_frozen());
    }

    #[test]
    fn parse_errors_carry_lines() {
        type Case = (&'static str, usize, fn(&ParseErrorKind) -> bool);
        let cases: &[Case] = &[
            ("", 1, |k| matches!(k, ParseErrorKind::MalformedHeader(_))),
            ("dests,A\noffsets,1\n", 1, |k| matches!(k, ParseErrorKind::MalformedHeader(_))),
            ("destinations,A\n", 2, |k| matches!(k, ParseErrorKind::MalformedHeader(_))),
            ("destinations,A,B\noffsets,1\n", 2, |k| matches!(k, ParseErrorKind::RaggedRow { expected: 2, found: 1 })),
            ("destinations,A,B\noffsets,2,2\n", 2, |k| matches!(k, ParseErrorKind::DuplicateOffset(2))),
            ("destinations,A,B\noffsets,3,2\n", 2, |k| matches!(k, ParseErrorKind::NonIncreasingOffset(2))),
            ("destinations,A\noffsets,x\n", 2, |k| matches!(k, ParseErrorKind::NonIntegerCell(_))),
            ("destinations,A,B\noffsets,1,2\ns,0,5\n", 3, |k| matches!(k, ParseErrorKind::RaggedRow { expected: 2, found: 1 })),
            ("destinations,A\noffsets,1\ns,0,5\nt,1,-3\n", 4, |k| matches!(k, ParseErrorKind::NonIntegerCell(_))),
            ("destinations,A\noffsets,1\ns,0,5\nt,0,3\n", 4, |k| matches!(k, ParseErrorKind::DuplicateOffset(0))),
            ("destinations,A\noffsets,1\n,0,5\n", 3, |k| matches!(k, ParseErrorKind::EmptyLabel)),
        ];
        for (text, line, check) in cases {
            let e = parse_build_matrix(text).unwrap_err();
            assert_eq!(e.line, *line, "{text:?}: {e}");
            assert!(check(&e.kind), "{text:?}: {e}");
            assert!(e.to_string().starts_with(&format!("line {line}:")));
        }
    }

    #[test]
    fn seven_cells_under_eight_destinations() {
        let text = HOSPITALS.replacen("Rumuomasi,0,312,771,,,,,,", "Rumuomasi,0,312,771,,,,,", 1);
        let e = parse_build_matrix(&text).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::RaggedRow { expected: 8, found: 7 });
        assert_eq!(e.line, 3);
    }

    #[test]
    fn zero_cell_fails_validation() {
        let m = parse_build_matrix("destinations,A,B\noffsets,1,2\ns,0,0,4\n").unwrap();
        let report = to_graph(&m).unwrap_err();
        let names: Vec<_> = report.violations.iter().map(Violation::name).collect();
        assert_eq!(names, ["NonPositiveWeight"]);
        let m = parse_build_matrix("destinations,A,B\noffsets,1,2\ns,0,4,4\n").unwrap();
        let names: Vec<_> = to_graph(&m).unwrap_err().violations.iter().map(Violation::name).collect();
        assert_eq!(names, ["EqualAdjacentWeight"]);
        let m = parse_build_matrix("destinations,A,s\noffsets,1,2\ns,0,4,5\n").unwrap();
        let names: Vec<_> = to_graph(&m).unwrap_err().violations.iter().map(Violation::name).collect();
        assert_eq!(names, ["DuplicateLabel"]);
    }

    #[test]
    fn fixture_round_trips() {
        let m = parse_build_matrix(HOSPITALS).unwrap();
        let g = to_graph(&m).unwrap();
        let back = BuildMatrix::from_graph(&g).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_csv(), HOSPITALS);
    }

    #[test]
    fn crlf_and_padding_are_tolerated() {
        let m = parse_build_matrix("destinations, A ,B\r\noffsets,1, 2\r\ns,0, 7,\r\n\r\n").unwrap();
        assert_eq!(m.destination_labels, ["A", "B"]);
        assert_eq!(m.rows[0].cells, [Some(7), None]);
    }

    prop_compose! {
        fn matrix()(cols in 0usize..6, rows in 0usize..6)
            (cells in prop::collection::vec(prop::collection::vec(prop::option::of(1u64..5000), cols), rows),
             cols in Just(cols))
            -> BuildMatrix
        {
            let rows = cells.into_iter().enumerate().map(|(r, mut cells)| {
                // keep per-row weights distinct
                let mut seen = std::collections::HashSet::new();
                for c in cells.iter_mut() {
                    if let Some(w) = *c {
                        if !seen.insert(w) { *c = None; }
                    }
                }
                MatrixRow { source_label: format!("s{r}"), source_offset: r as u32 * 2, cells }
            }).collect();
            BuildMatrix {
                destination_labels: (0..cols).map(|c| format!("d{c}")).collect(),
                destination_offsets: (0..cols).map(|c| c as u32 * 3 + 1).collect(),
                rows,
            }
        }
    }

    proptest! {
        #[test]
        fn matrix_graph_round_trip(m in matrix()) {
            let text = m.to_csv();
            let parsed = parse_build_matrix(&text).unwrap();
            prop_assert_eq!(&parsed, &m);
            let g = to_graph(&parsed).unwrap();
            prop_assert_eq!(BuildMatrix::from_graph(&g).unwrap(), m);
        }
    }
}
