mod bench;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use wdom::{
    brute_lmax, brute_wdom, decompose, is_w_dominating, lmax_value, make_nice, parse_graph,
    parse_td, solve_lmax_with, solve_wdom_with, validate_td, write_td, EliminationHeuristic, Graph,
    GraphFormat, JoinStrategy, SolveError, SolveOptions, Vertex,
};

/// Minimum w-dominating sets and budgeted L-Max w-domination on graphs of
/// bounded treewidth.
#[derive(Parser)]
#[command(name = "wdom", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance through a tree decomposition.
    Solve(SolveArgs),
    /// Write a heuristic tree decomposition in .td format.
    Decompose(DecomposeArgs),
    /// Check a .td file against a graph.
    ValidateTd(ValidateArgs),
    /// Solve one small instance by brute force.
    Oracle(OracleArgs),
    /// Time the solvers on random partial k-trees and print CSV.
    #[command(long_about = bench::LONG_ABOUT)]
    Bench(bench::BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Wds,
    Lmax,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Wds => "wds",
            Problem::Lmax => "lmax",
        })
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    PaceGr,
    EdgeList,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Method {
    MinFill,
    MinDegree,
}

impl From<Method> for EliminationHeuristic {
    fn from(m: Method) -> Self {
        match m {
            Method::MinFill => EliminationHeuristic::MinFill,
            Method::MinDegree => EliminationHeuristic::MinDegree,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Naive,
    Convolution,
}

impl From<Strategy> for JoinStrategy {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Naive => JoinStrategy::Naive,
            Strategy::Convolution => JoinStrategy::Convolution,
        }
    }
}

#[derive(Args)]
struct GraphArgs {
    /// Graph file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "pace-gr")]
    format: Format,
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, value_enum)]
    problem: Problem,
    /// Required number of selected neighbors, at least 1.
    #[arg(long)]
    w: usize,
    /// Largest allowed set size; required for lmax.
    #[arg(long)]
    budget: Option<usize>,
    #[command(flatten)]
    graph: GraphArgs,
    /// Include the chosen set in the output.
    #[arg(long)]
    witness: bool,
    /// Print one JSON line instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Use this .td decomposition instead of computing one.
    #[arg(long)]
    td: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "min-fill")]
    method: Method,
    #[arg(long, value_enum, default_value = "convolution")]
    strategy: Strategy,
    /// Worker threads for the join nodes.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum, default_value = "min-fill")]
    method: Method,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    td: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    problem: ProblemArgs,
}

/// Exit 2 for anything the caller can fix, 1 for broken invariants.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Internal(_) => CliError::Internal(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn usage(msg: impl fmt::Display) -> CliError {
    CliError::Usage(msg.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load_graph(args: &GraphArgs) -> Result<Graph, CliError> {
    let format = match args.format {
        Format::PaceGr => GraphFormat::PaceGr,
        Format::EdgeList => GraphFormat::EdgeList,
    };
    parse_graph(&read(&args.input)?, format)
        .map_err(|e| usage(format!("{}: {e}", args.input.display())))
}

/// Checks `w` and resolves the budget flag.
fn budget_for(args: &ProblemArgs) -> Result<Option<usize>, CliError> {
    if args.w == 0 {
        return Err(usage("--w must be at least 1"));
    }
    match (args.problem, args.budget) {
        (Problem::Lmax, None) => Err(usage("--budget is required with --problem lmax")),
        (Problem::Wds, Some(_)) => Err(usage("--budget only applies to --problem lmax")),
        (_, budget) => Ok(budget),
    }
}

#[derive(Serialize)]
struct SolveResult {
    problem: Problem,
    w: usize,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    budget: Option<usize>,
    size_or_value: usize,
    /// Sorted and 1-based.
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Vec<Vertex>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    width_used: Option<isize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    node_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    strategy: Option<&'static str>,
    wall_time_ms: u128,
}

impl SolveResult {
    fn print(&self, json: bool) {
        if json {
            println!(
                "{}",
                serde_json::to_string(self).expect("plain data serializes")
            );
            return;
        }
        println!("problem: {}", self.problem);
        println!("w: {}", self.w);
        if let Some(l) = self.budget {
            println!("L: {l}");
        }
        let label = match self.problem {
            Problem::Wds => "size",
            Problem::Lmax => "value",
        };
        println!("{label}: {}", self.size_or_value);
        if let Some(set) = &self.witness {
            let list: Vec<String> = set.iter().map(|v| v.to_string()).collect();
            println!("witness: {}", list.join(" "));
        }
        if let Some(width) = self.width_used {
            println!("width: {width}");
        }
        if let Some(nodes) = self.node_count {
            println!("nice nodes: {nodes}");
        }
        if let Some(s) = self.strategy {
            println!("strategy: {s}");
        }
        println!("time: {} ms", self.wall_time_ms);
    }
}

/// Re-checks a set before it is printed; returns it 1-based.
fn certify(
    graph: &Graph,
    problem: Problem,
    w: usize,
    budget: Option<usize>,
    set: Vec<Vertex>,
    claimed: usize,
) -> Result<Vec<Vertex>, CliError> {
    let bad = |why: String| CliError::Internal(format!("witness {set:?} rejected: {why}"));
    let ok = match problem {
        Problem::Wds => {
            set.len() == claimed
                && is_w_dominating(graph, &set, w).map_err(|e| bad(e.to_string()))?
        }
        Problem::Lmax => {
            set.len() <= budget.unwrap_or(0)
                && lmax_value(graph, &set, w).map_err(|e| bad(e.to_string()))? == claimed
        }
    };
    if !ok {
        return Err(bad(format!("does not certify {claimed}")));
    }
    Ok(set.iter().map(|v| v + 1).collect())
}

fn solve(args: SolveArgs) -> Result<(), CliError> {
    let p = &args.problem;
    let budget = budget_for(p)?;
    if args.threads == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let graph = load_graph(&p.graph)?;
    if graph.vertex_count() == 0 {
        return Err(usage("the graph has no vertices"));
    }
    let td = match &args.td {
        Some(path) => {
            let td =
                parse_td(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let report = validate_td(&graph, &td);
            if !report.is_valid() {
                return Err(usage(format!(
                    "{} is not a tree decomposition of the graph:\n{report}",
                    path.display()
                )));
            }
            td
        }
        None => decompose(&graph, args.method.into()),
    };
    let nd = make_nice(&td, &graph).map_err(usage)?;
    let opts = SolveOptions {
        strategy: args.strategy.into(),
        witness: p.witness,
    };
    let start = Instant::now();
    let (value, set) = match budget {
        None => {
            let s = solve_wdom_with(&graph, &nd, p.w, &opts)?;
            (s.size, s.witness)
        }
        Some(l) => {
            let s = solve_lmax_with(&graph, &nd, p.w, l, &opts)?;
            (s.value, s.witness)
        }
    };
    let wall_time_ms = start.elapsed().as_millis();
    let witness = set
        .map(|s| certify(&graph, p.problem, p.w, budget, s, value))
        .transpose()?;
    SolveResult {
        problem: p.problem,
        w: p.w,
        budget,
        size_or_value: value,
        witness,
        width_used: Some(nd.width()),
        node_count: Some(nd.len()),
        strategy: Some(match args.strategy {
            Strategy::Naive => "naive",
            Strategy::Convolution => "convolution",
        }),
        wall_time_ms,
    }
    .print(p.json);
    Ok(())
}

fn oracle(args: OracleArgs) -> Result<(), CliError> {
    let p = &args.problem;
    let budget = budget_for(p)?;
    let graph = load_graph(&p.graph)?;
    let start = Instant::now();
    let (value, set) = match budget {
        None => brute_wdom(&graph, p.w),
        Some(l) => brute_lmax(&graph, p.w, l),
    }
    .map_err(usage)?;
    let wall_time_ms = start.elapsed().as_millis();
    let set = certify(&graph, p.problem, p.w, budget, set, value)?;
    SolveResult {
        problem: p.problem,
        w: p.w,
        budget,
        size_or_value: value,
        witness: p.witness.then_some(set),
        width_used: None,
        node_count: None,
        strategy: None,
        wall_time_ms,
    }
    .print(p.json);
    Ok(())
}

fn decompose_cmd(args: DecomposeArgs) -> Result<(), CliError> {
    let graph = load_graph(&args.graph)?;
    let text = write_td(&decompose(&graph, args.method.into()));
    match &args.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn validate_cmd(args: ValidateArgs) -> Result<(), CliError> {
    let graph = load_graph(&args.graph)?;
    let td =
        parse_td(&read(&args.td)?).map_err(|e| usage(format!("{}: {e}", args.td.display())))?;
    let report = validate_td(&graph, &td);
    if report.is_valid() {
        println!("valid (width {})", td.width());
        Ok(())
    } else {
        // ids in the report are 0-based
        Err(usage(format!(
            "invalid decomposition (0-based ids):\n{report}"
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Decompose(a) => decompose_cmd(a),
        Command::ValidateTd(a) => validate_cmd(a),
        Command::Oracle(a) => oracle(a),
        Command::Bench(a) => bench::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wdom: {e}");
            ExitCode::from(e.code())
        }
    }
}
