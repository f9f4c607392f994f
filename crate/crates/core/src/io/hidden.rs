use crate::graph::{ConicGraph, NodeKind, Weight};
use crate::invention::HiddenPath;

use super::{ParseError, ParseErrorKind};

/// Parses `from,to,true_weight` rows, resolving labels against `graph`.
/// Both endpoints must be destinations.
pub fn parse_hidden_paths(text: &str, graph: &ConicGraph) -> Result<Vec<HiddenPath>, ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut paths = Vec::new();
    let mut last_line = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ParseError {
            line: e.position().map_or(last_line as usize + 1, |p| p.line() as usize),
            kind: ParseErrorKind::Csv(e.to_string()),
        })?;
        let line = record.position().map_or(last_line + 1, |p| p.line());
        last_line = line;
        let line = line as usize;
        if i == 0 {
            if record.iter().collect::<Vec<_>>() != ["from", "to", "true_weight"] {
                return Err(ParseError {
                    line,
                    kind: ParseErrorKind::MalformedHeader("expected `from,to,true_weight`".into()),
                });
            }
            continue;
        }
        if record.len() != 3 {
            return Err(ParseError { line, kind: ParseErrorKind::RaggedRow { expected: 3, found: record.len() } });
        }
        let endpoint = |label: &str| {
            let id = graph
                .node_by_label(label)
                .ok_or_else(|| ParseError { line, kind: ParseErrorKind::UnknownLabel(label.to_owned()) })?;
            if graph.node(id).map(|n| n.kind) != Some(NodeKind::Destination) {
                return Err(ParseError { line, kind: ParseErrorKind::NotADestination(label.to_owned()) });
            }
            Ok(id)
        };
        let from = endpoint(&record[0])?;
        let to = endpoint(&record[1])?;
        let true_weight: Weight = record[2]
            .parse()
            .map_err(|_| ParseError { line, kind: ParseErrorKind::NonIntegerCell(record[2].to_owned()) })?;
        if true_weight == 0 {
            return Err(ParseError { line, kind: ParseErrorKind::NonPositiveWeight });
        }
        paths.push(HiddenPath { from, to, true_weight });
    }
    if paths.is_empty() && last_line == 0 {
        return Err(ParseError { line: 1, kind: ParseErrorKind::MalformedHeader("missing header".into()) });
    }
    Ok(paths)
}
