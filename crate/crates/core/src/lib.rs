//! Minimum w-dominating sets and budgeted w-domination coverage on graphs of
//! bounded treewidth, by dynamic programming over nice tree decompositions.
//!
//! The usual path: parse or build a [`Graph`], [`decompose`] it, turn the
//! decomposition into a [`NiceDecomposition`] with [`make_nice`], then call
//! [`solve_wdom`] or [`solve_lmax`]. The [`oracle`] module has brute-force
//! counterparts for small graphs.

pub mod coloring;
pub mod dp;
pub mod generate;
pub mod graph;
pub mod lmax;
pub mod nice;
pub mod oracle;
pub mod subset_conv;
pub mod treedec;
pub mod value;
pub mod wdom;

pub use coloring::{Color, Coloring, Palette};
pub use dp::{JoinPlan, JoinStrategy, Retention, RunStats, SolveError, SolveOptions};
pub use graph::{parse_graph, write_pace_gr, Graph, GraphError, GraphFormat, ParseError, Vertex};
pub use lmax::{solve_lmax, solve_lmax_with, LmaxSolution, LmaxTable};
pub use nice::{make_nice, validate_nice, NiceDecomposition, NiceError, NiceNode, NodeKind};
pub use oracle::{brute_lmax, brute_wdom, is_w_dominating, lmax_value, OracleError};
pub use treedec::{
    decompose, parse_td, validate_td, write_td, EliminationHeuristic, TreeDecomposition,
    ValidationReport,
};
pub use value::DpValue;
pub use wdom::{solve_wdom, solve_wdom_with, WdsSolution, WdsTable};

pub type WdsTable16 = WdsTable<i16>;
pub type WdsTable32 = WdsTable<i32>;
pub type WdsTable64 = WdsTable<i64>;
pub type LmaxTable16 = LmaxTable<i16>;
pub type LmaxTable32 = LmaxTable<i32>;
pub type LmaxTable64 = LmaxTable<i64>;
