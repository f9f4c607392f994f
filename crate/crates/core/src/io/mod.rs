//! File formats and query assembly for the command line tool.

mod dot;
mod hidden;
mod matrix;
mod query;
mod table;

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::graph::{ConicGraph, ValidationReport};

pub use dot::export_dot;
pub use hidden::parse_hidden_paths;
pub use matrix::{parse_build_matrix, to_graph, to_graph_unchecked, BuildMatrix, MatrixRow};
pub use query::{Alternate, BestRoute, QueryEngine, QueryError, QueryOptions, QueryResult};
pub use table::Table;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    MalformedHeader(String),
    RaggedRow { expected: usize, found: usize },
    NonIntegerCell(String),
    DuplicateOffset(u32),
    NonIncreasingOffset(u32),
    EmptyLabel,
    UnknownLabel(String),
    NotADestination(String),
    NonPositiveWeight,
    Csv(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::MalformedHeader(why) => write!(f, "malformed header: {why}"),
            ParseErrorKind::RaggedRow { expected, found } => {
                write!(f, "ragged row: expected {expected} cells, found {found}")
            }
            ParseErrorKind::NonIntegerCell(c) => write!(f, "not a non-negative integer: {c:?}"),
            ParseErrorKind::DuplicateOffset(o) => write!(f, "duplicate offset {o}"),
            ParseErrorKind::NonIncreasingOffset(o) => write!(f, "offset {o} is not increasing"),
            ParseErrorKind::EmptyLabel => f.write_str("empty label"),
            ParseErrorKind::UnknownLabel(l) => write!(f, "unknown label {l:?}"),
            ParseErrorKind::NotADestination(l) => write!(f, "{l:?} is not a destination"),
            ParseErrorKind::NonPositiveWeight => f.write_str("weight must be positive"),
            ParseErrorKind::Csv(e) => write!(f, "{e}"),
        }
    }
}

/// Parse failure with a 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("{}: invalid graph: {report}", path.display())]
    Invalid { path: PathBuf, report: ValidationReport },
}

pub fn read_file(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Read { path: path.to_owned(), source })
}

/// Reads, parses and validates a build-matrix file.
pub fn load_graph(path: &Path) -> Result<(BuildMatrix, ConicGraph), LoadError> {
    let text = read_file(path)?;
    let matrix = parse_build_matrix(&text).map_err(|source| LoadError::Parse { path: path.to_owned(), source })?;
    let graph = to_graph(&matrix).map_err(|report| LoadError::Invalid { path: path.to_owned(), report })?;
    Ok((matrix, graph))
}
