//! Command-line front end. Every command writes one JSON report (or, for
//! `reduce`, a CSV dataset); diagnostics go to stderr.
//!
//! Exit status: 0 on success, 1 on domain errors such as solver limits,
//! 2 on unreadable or malformed input.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::dataset::{load_dataset, write_dataset, DiscreteDataset, StatsCache};
use crate::error::{Error, Result};
use crate::path_learn::{solve_path_exact, solve_path_heuristic, PathSearchResult, DEFAULT_EXACT_LIMIT};
use crate::reduction::{decide_hp_all, generate_reduction, verify_reduction_cached};
use crate::scoring::{canonical_sum, structure_local_scores, Criterion};
use crate::structures::{load_graph, Branching, HpInstance, PathStructure, StructureDoc};
use crate::tree_learn::{build_weights_cached, learn_optimal_branching, learn_optimal_spanning_tree};

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "pathlearn", version, about = "Tree, branching and path structure learning for discrete data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score a structure on a dataset.
    Score(ScoreArgs),
    /// Learn the optimal branching and spanning tree.
    LearnTree(LearnArgs),
    /// Learn the optimal path model.
    LearnPath(LearnPathArgs),
    /// Generate the reduction dataset for a graph (CSV).
    Reduce(ReduceArgs),
    /// Check the reduction conditions on a dataset against its graph.
    Verify(VerifyArgs),
    /// Decide whether a graph has a Hamiltonian path via optimal path learning.
    DecideHp(DecideArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Ml,
    Mdl,
    Bayes,
    All,
}

impl CriterionArg {
    fn criteria(self) -> Vec<Criterion> {
        match self {
            CriterionArg::Ml => vec![Criterion::Ml],
            CriterionArg::Mdl => vec![Criterion::Mdl],
            CriterionArg::Bayes => vec![Criterion::Bayes],
            CriterionArg::All => Criterion::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArg {
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// `path:<order>` (e.g. `path:2,0,1`) or a JSON file holding
    /// `{"order":[...]}` or `{"parent":[...]}`.
    #[arg(long)]
    pub structure: String,
    #[arg(long, value_enum, default_value = "ml")]
    pub criterion: CriterionArg,
    #[command(flatten)]
    pub out: OutputArg,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "ml")]
    pub criterion: CriterionArg,
    #[command(flatten)]
    pub out: OutputArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Heuristic,
}

#[derive(Debug, Args)]
pub struct LearnPathArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "ml")]
    pub criterion: CriterionArg,
    #[arg(long, value_enum, default_value = "exact")]
    pub method: Method,
    #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
    pub exact_limit: usize,
    /// Random restarts on top of the greedy starts (heuristic only).
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArg,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// CSV destination; with it a JSON summary is printed, without it the
    /// CSV goes to stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub criterion: CriterionArg,
    #[command(flatten)]
    pub out: OutputArg,
}

#[derive(Debug, Args)]
pub struct DecideArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub criterion: CriterionArg,
    #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
    pub exact_limit: usize,
    #[command(flatten)]
    pub out: OutputArg,
}

#[derive(Debug, Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Report<T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    inputs: BTreeMap<&'static str, InputDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parameters: Option<serde_json::Value>,
    results: Vec<T>,
}

struct Input {
    bytes: Vec<u8>,
    digest: InputDigest,
}

fn read_input(path: &Path) -> Result<Input> {
    let bytes = fs::read(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    let digest = InputDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    };
    Ok(Input { bytes, digest })
}

fn read_dataset(path: &Path) -> Result<(DiscreteDataset, InputDigest)> {
    let input = read_input(path)?;
    Ok((load_dataset(input.bytes.as_slice())?, input.digest))
}

fn read_graph(path: &Path) -> Result<(HpInstance, InputDigest)> {
    let input = read_input(path)?;
    Ok((load_graph(input.bytes.as_slice())?, input.digest))
}

fn emit<T: Serialize>(report: &Report<T>, output: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.into()))?;
    text.push('\n');
    match output {
        Some(path) => fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Parses `path:2,0,1`, or otherwise reads a JSON structure file.
fn read_structure(arg: &str) -> Result<(StructureDoc, Option<InputDigest>)> {
    if let Some(list) = arg.strip_prefix("path:") {
        let order = list
            .split(',')
            .enumerate()
            .map(|(c, s)| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::parse(1, c + 1, format!("bad vertex {s:?} in --structure")))
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok((StructureDoc::Path(PathStructure::new(order)?), None));
    }
    let input = read_input(Path::new(arg))?;
    let doc: StructureDoc = serde_json::from_slice(&input.bytes)
        .map_err(|e| Error::parse(e.line(), e.column(), e.to_string()))?;
    Ok((doc, Some(input.digest)))
}

#[derive(Debug, Serialize)]
struct ScoreResult {
    criterion: Criterion,
    structure: StructureDoc,
    local_scores: Vec<f64>,
    total: f64,
}

#[derive(Debug, Serialize)]
struct TreeResult {
    criterion: Criterion,
    branching: Branching,
    branching_score: f64,
    spanning_tree: Branching,
    spanning_tree_score: f64,
}

#[derive(Debug, Serialize)]
struct PathResult {
    criterion: Criterion,
    method: Method,
    best_path: PathStructure,
    best_score: f64,
    upper_bound: f64,
    gap: f64,
    exact: bool,
}

impl PathResult {
    fn new(method: Method, r: PathSearchResult) -> Self {
        PathResult {
            criterion: r.best_score.criterion,
            method,
            best_path: r.best_path,
            best_score: r.best_score.value,
            upper_bound: r.upper_bound.value,
            gap: r.gap,
            exact: r.exact,
        }
    }
}

#[derive(Debug, Serialize)]
struct ReduceSummary {
    output: String,
    variables: usize,
    cases: usize,
    sha256: String,
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Score(a) => {
            let (data, data_digest) = read_dataset(&a.data)?;
            let (doc, structure_digest) = read_structure(&a.structure)?;
            let structure = doc.to_parent_map();
            let cache = StatsCache::new(&data);
            let mut results = Vec::new();
            for criterion in a.criterion.criteria() {
                let local: Vec<f64> = structure_local_scores(criterion, &cache, &structure)?
                    .into_iter()
                    .map(|s| s.value)
                    .collect();
                let total = canonical_sum(&mut local.clone());
                results.push(ScoreResult {
                    criterion,
                    structure: doc.clone(),
                    local_scores: local,
                    total,
                });
            }
            let mut inputs = BTreeMap::from([("data", data_digest)]);
            inputs.extend(structure_digest.map(|d| ("structure", d)));
            let report = Report {
                tool: TOOL,
                version: VERSION,
                command: "score",
                inputs,
                parameters: None,
                results,
            };
            emit(&report, a.out.output.as_deref(), stdout)
        }
        Command::LearnTree(a) => {
            let (data, digest) = read_dataset(&a.data)?;
            let cache = StatsCache::new(&data);
            let mut results = Vec::new();
            for criterion in a.criterion.criteria() {
                let w = build_weights_cached(criterion, &cache)?;
                let (branching, bs) = learn_optimal_branching(&w);
                let (tree, ts) = learn_optimal_spanning_tree(&w);
                results.push(TreeResult {
                    criterion,
                    branching,
                    branching_score: bs.value,
                    spanning_tree: tree,
                    spanning_tree_score: ts.value,
                });
            }
            let report = Report {
                tool: TOOL,
                version: VERSION,
                command: "learn-tree",
                inputs: BTreeMap::from([("data", digest)]),
                parameters: None,
                results,
            };
            emit(&report, a.out.output.as_deref(), stdout)
        }
        Command::LearnPath(a) => {
            let (data, digest) = read_dataset(&a.data)?;
            let cache = StatsCache::new(&data);
            let mut results = Vec::new();
            for criterion in a.criterion.criteria() {
                let w = build_weights_cached(criterion, &cache)?;
                let r = match a.method {
                    Method::Exact => solve_path_exact(&w, a.exact_limit)?,
                    Method::Heuristic => solve_path_heuristic(&w, a.restarts, a.seed)?,
                };
                results.push(PathResult::new(a.method, r));
            }
            let parameters = serde_json::json!({
                "method": a.method,
                "exact_limit": a.exact_limit,
                "restarts": a.restarts,
                "seed": a.seed,
            });
            let report = Report {
                tool: TOOL,
                version: VERSION,
                command: "learn-path",
                inputs: BTreeMap::from([("data", digest)]),
                parameters: Some(parameters),
                results,
            };
            emit(&report, a.out.output.as_deref(), stdout)
        }
        Command::Reduce(a) => {
            let (g, digest) = read_graph(&a.graph)?;
            let data = generate_reduction(&g)?;
            let mut csv = Vec::new();
            write_dataset(&data, &mut csv)?;
            match a.output {
                None => {
                    stdout.write_all(&csv)?;
                    Ok(())
                }
                Some(path) => {
                    fs::write(&path, &csv)?;
                    let report = Report {
                        tool: TOOL,
                        version: VERSION,
                        command: "reduce",
                        inputs: BTreeMap::from([("graph", digest)]),
                        parameters: None,
                        results: vec![ReduceSummary {
                            output: path.display().to_string(),
                            variables: data.variable_count(),
                            cases: data.case_count(),
                            sha256: hex::encode(Sha256::digest(&csv)),
                        }],
                    };
                    emit(&report, None, stdout)
                }
            }
        }
        Command::Verify(a) => {
            let (data, data_digest) = read_dataset(&a.data)?;
            let (g, graph_digest) = read_graph(&a.graph)?;
            let cache = StatsCache::new(&data);
            let results = a
                .criterion
                .criteria()
                .into_iter()
                .map(|c| verify_reduction_cached(&cache, &g, c))
                .collect::<Result<Vec<_>>>()?;
            let report = Report {
                tool: TOOL,
                version: VERSION,
                command: "verify",
                inputs: BTreeMap::from([("data", data_digest), ("graph", graph_digest)]),
                parameters: None,
                results,
            };
            emit(&report, a.out.output.as_deref(), stdout)
        }
        Command::DecideHp(a) => {
            let (g, digest) = read_graph(&a.graph)?;
            let results = decide_hp_all(&g, &a.criterion.criteria(), a.exact_limit)?;
            let report = Report {
                tool: TOOL,
                version: VERSION,
                command: "decide-hp",
                inputs: BTreeMap::from([("graph", digest)]),
                parameters: Some(serde_json::json!({ "exact_limit": a.exact_limit })),
                results,
            };
            emit(&report, a.out.output.as_deref(), stdout)
        }
    }
}

/// Exit status for an error returned by [`run`].
pub fn exit_code(err: &Error) -> i32 {
    if err.is_input_error() {
        2
    } else {
        1
    }
}
