//! The `conicroute` command line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 parse or validation failure,
//! 3 query failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::contraction::{build_hierarchy, Overlay};
use crate::graph::{ConicGraph, NodeId, Weight};
use crate::invention::{FitnessReport, HiddenPath, PolicyThreshold, Tolerance};
use crate::io::{
    export_dot, load_graph, parse_build_matrix, parse_hidden_paths, read_file, to_graph_unchecked, LoadError,
    QueryEngine, QueryError, QueryOptions, QueryResult, Table,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_QUERY: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

/// Nearest-destination routing with contraction and edge invention over
/// build-matrix files.
#[derive(Debug, Parser)]
#[command(name = "conicroute", version)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Relative error tolerated when fitting invented edges to hidden paths
    /// (decimal or fraction).
    #[arg(long, global = true, default_value = "0.1")]
    tolerance: Tolerance,
    /// Drop invented edges heavier than this.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    allowable: Option<u64>,
    /// Let queries traverse invented edges.
    #[arg(long, global = true)]
    use_invented: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ingest and validate a build matrix, then dump the graph.
    Build {
        matrix: PathBuf,
        /// Write the dump here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Report structural violations of a build matrix.
    Validate { matrix: PathBuf },
    /// Nearest destination from a source plus invented alternates.
    Query {
        matrix: PathBuf,
        #[arg(long, required_unless_present = "all_sources", conflicts_with = "all_sources")]
        source: Option<String>,
        /// Query every source.
        #[arg(long)]
        all_sources: bool,
        /// CSV of known hidden paths (`from,to,true_weight`).
        #[arg(long)]
        hidden: Option<PathBuf>,
        /// Skip invented alternates.
        #[arg(long)]
        no_invent: bool,
    },
    /// Invent edges for every source.
    Invent {
        matrix: PathBuf,
        #[arg(long)]
        hidden: Option<PathBuf>,
    },
    /// Contract all nodes and emit the shortcut overlay.
    Contract {
        matrix: PathBuf,
        /// Comma-separated labels giving the contraction order. Defaults to
        /// node id order.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<String>>,
    },
    /// Export the graph, as DOT with `--dot` or as JSON otherwise.
    Export {
        matrix: PathBuf,
        #[arg(long)]
        dot: bool,
        /// Include contraction shortcuts.
        #[arg(long)]
        shortcuts: bool,
        /// Include invented edges.
        #[arg(long)]
        invented: bool,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure { code: EXIT_INPUT, message: message.to_string() }
    }
    fn query(message: impl ToString) -> Self {
        Failure { code: EXIT_QUERY, message: message.to_string() }
    }
    fn usage(message: impl ToString) -> Self {
        Failure { code: EXIT_USAGE, message: message.to_string() }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure::input(e)
    }
}

impl From<QueryError> for Failure {
    fn from(e: QueryError) -> Self {
        match e {
            QueryError::Graph(_) => Failure::input(e),
            _ => Failure::query(e),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn policy(cli: &Cli) -> Result<Option<PolicyThreshold>, Failure> {
    cli.allowable.map(PolicyThreshold::new).transpose().map_err(Failure::usage)
}

fn hidden_paths(path: Option<&Path>, graph: &ConicGraph) -> Result<Vec<HiddenPath>, Failure> {
    let Some(path) = path else { return Ok(Vec::new()) };
    let text = read_file(path)?;
    parse_hidden_paths(&text, graph).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(Failure::input)?;
    writeln!(out, "{text}").map_err(Failure::input)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(Failure::input)
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    match &cli.command {
        Command::Build { matrix, output } => {
            let (_, graph) = load_graph(matrix)?;
            match cli.format {
                Format::Json => {
                    let text = serde_json::to_string_pretty(&graph).map_err(Failure::input)? + "\n";
                    match output {
                        Some(p) => std::fs::write(p, text)
                            .map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display())))?,
                        None => emit(out, &text)?,
                    }
                }
                Format::Table => emit(out, &node_table(&graph).to_string())?,
            }
            Ok(EXIT_OK)
        }
        Command::Validate { matrix } => {
            let text = read_file(matrix)?;
            let parsed = parse_build_matrix(&text).map_err(|e| Failure::input(format!("{}: {e}", matrix.display())))?;
            let report = to_graph_unchecked(&parsed).validate();
            match cli.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Report<'a> {
                        valid: bool,
                        violations: &'a [crate::graph::Violation],
                    }
                    emit_json(out, &Report { valid: report.is_valid(), violations: &report.violations })?
                }
                Format::Table => {
                    let mut t = Table::new(["violation", "detail"]);
                    for v in &report.violations {
                        t.row([v.name().to_owned(), v.to_string()]);
                    }
                    if report.is_valid() {
                        emit(out, "valid\n")?;
                    } else {
                        emit(out, &t.to_string())?;
                    }
                }
            }
            Ok(if report.is_valid() { EXIT_OK } else { EXIT_INPUT })
        }
        Command::Query { matrix, source, all_sources, hidden, no_invent } => {
            let (_, graph) = load_graph(matrix)?;
            let options = QueryOptions {
                invent: !no_invent,
                use_invented: cli.use_invented,
                policy: policy(cli)?,
                tolerance: cli.tolerance,
                hidden: hidden_paths(hidden.as_deref(), &graph)?,
            };
            let engine = QueryEngine::new(&graph, options)?;
            if *all_sources {
                let mut results = Vec::new();
                let mut failures = Vec::new();
                for (label, r) in engine.query_all() {
                    match r {
                        Ok(r) => results.push(r),
                        Err(e) => failures.push(format!("{label}: {e}")),
                    }
                }
                match cli.format {
                    Format::Json => emit_json(out, &results)?,
                    Format::Table => {
                        for r in &results {
                            emit(out, &query_table(r))?;
                        }
                    }
                }
                if !failures.is_empty() {
                    return Err(Failure::query(failures.join("; ")));
                }
            } else {
                let r = engine.query(source.as_deref().unwrap_or_default())?;
                match cli.format {
                    Format::Json => emit_json(out, &r)?,
                    Format::Table => emit(out, &query_table(&r))?,
                }
            }
            Ok(EXIT_OK)
        }
        Command::Invent { matrix, hidden } => {
            let (_, graph) = load_graph(matrix)?;
            let options = QueryOptions {
                policy: policy(cli)?,
                tolerance: cli.tolerance,
                hidden: hidden_paths(hidden.as_deref(), &graph)?,
                ..Default::default()
            };
            let engine = QueryEngine::new(&graph, options)?;
            let label = |n: NodeId| graph.label(n).unwrap_or_default().to_owned();

            #[derive(Serialize)]
            struct Invented {
                from: String,
                to: String,
                weight: Weight,
                pair_weights: (Weight, Weight),
                fitness: Option<FitnessReport>,
            }
            #[derive(Serialize)]
            struct SourceInventions {
                source: String,
                invented: Vec<Invented>,
            }
            let listing: Vec<SourceInventions> = engine
                .inventions()
                .iter()
                .map(|(&s, edges)| SourceInventions {
                    source: label(s),
                    invented: edges
                        .iter()
                        .map(|e| Invented {
                            from: label(e.from),
                            to: label(e.to),
                            weight: e.weight,
                            pair_weights: e.pair_weights,
                            fitness: engine.score(e),
                        })
                        .collect(),
                })
                .collect();
            match cli.format {
                Format::Json => emit_json(out, &listing)?,
                Format::Table => {
                    let mut t = Table::new(["source", "from", "to", "weight", "pair", "fit"]);
                    for s in &listing {
                        for e in &s.invented {
                            t.row([
                                s.source.clone(),
                                e.from.clone(),
                                e.to.clone(),
                                e.weight.to_string(),
                                format!("{}/{}", e.pair_weights.0, e.pair_weights.1),
                                fit_cell(e.fitness.as_ref()),
                            ]);
                        }
                    }
                    emit(out, &t.to_string())?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Contract { matrix, order } => {
            let (_, graph) = load_graph(matrix)?;
            let order = order
                .as_ref()
                .map(|labels| {
                    labels
                        .iter()
                        .map(|l| graph.node_by_label(l).ok_or_else(|| Failure::query(format!("unknown label {l:?}"))))
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()?;
            let overlay = build_hierarchy(&graph, order.as_deref()).map_err(Failure::usage)?;
            let label = |n: NodeId| graph.label(n).unwrap_or_default().to_owned();

            #[derive(Serialize)]
            struct ShortcutOut {
                from: String,
                to: String,
                weight: Weight,
                via: String,
            }
            #[derive(Serialize)]
            struct OverlayOut {
                order: Vec<String>,
                shortcuts: Vec<ShortcutOut>,
            }
            let listing = OverlayOut {
                order: overlay.order.iter().map(|&n| label(n)).collect(),
                shortcuts: overlay
                    .shortcuts
                    .iter()
                    .map(|s| ShortcutOut { from: label(s.from), to: label(s.to), weight: s.weight, via: label(s.via) })
                    .collect(),
            };
            match cli.format {
                Format::Json => emit_json(out, &listing)?,
                Format::Table => {
                    let mut t = Table::new(["from", "to", "weight", "via"]);
                    for s in &listing.shortcuts {
                        t.row([s.from.clone(), s.to.clone(), s.weight.to_string(), s.via.clone()]);
                    }
                    emit(out, &t.to_string())?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Export { matrix, dot, shortcuts, invented } => {
            let (_, graph) = load_graph(matrix)?;
            let overlay: Option<Overlay> =
                shortcuts.then(|| build_hierarchy(&graph, None)).transpose().map_err(Failure::usage)?;
            let engine;
            let inventions: Option<Vec<_>> = if *invented {
                engine = QueryEngine::new(&graph, QueryOptions { policy: policy(cli)?, ..Default::default() })?;
                Some(engine.inventions().values().flatten().copied().collect())
            } else {
                None
            };
            if *dot {
                emit(out, &export_dot(&graph, overlay.as_ref(), inventions.as_deref()))?;
            } else {
                let derived = overlay
                    .iter()
                    .flat_map(|o| o.shortcuts.iter().map(|s| s.to_edge()))
                    .chain(inventions.iter().flatten().map(|e| e.to_edge()));
                let full = graph.with_derived_edges(derived).map_err(Failure::input)?;
                emit_json(out, &full)?;
            }
            Ok(EXIT_OK)
        }
    }
}

fn fit_cell(f: Option<&FitnessReport>) -> String {
    match f {
        None => "-".to_owned(),
        Some(f) => format!("{} ({})", if f.fit { "yes" } else { "no" }, f.relative_error),
    }
}

fn node_table(graph: &ConicGraph) -> Table {
    let mut t = Table::new(["id", "label", "kind", "offset", "out"]);
    for n in graph.nodes() {
        let out: Vec<String> =
            graph.out_edges(n.id).map(|(_, e)| format!("{}:{}", graph.label(e.to).unwrap_or("?"), e.weight)).collect();
        t.row([n.id.0.to_string(), n.label.clone(), n.kind.to_string(), n.offset.to_string(), out.join(" ")]);
    }
    t
}

fn query_table(r: &QueryResult) -> String {
    let mut best = Table::new(["source", "destination", "distance", "path"]);
    best.row([r.source.clone(), r.best.destination.clone(), r.best.distance.to_string(), r.best.path.join(" -> ")]);
    let mut text = best.to_string();
    if !r.invented_alternates.is_empty() {
        let mut alt = Table::new(["from", "to", "weight", "fit"]);
        for a in &r.invented_alternates {
            alt.row([a.from.clone(), a.to.clone(), a.weight.to_string(), fit_cell(a.fitness.as_ref())]);
        }
        text.push('\n');
        text.push_str(&alt.to_string());
    }
    text
}
