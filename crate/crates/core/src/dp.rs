//! Plumbing shared by the two table engines: bag layouts, the per-vertex
//! pair rule at join nodes, enumeration of join strata, options and errors.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::coloring::Palette;
use crate::graph::{Graph, Vertex};
use crate::nice::{NiceDecomposition, NodeKind};
use crate::treedec::ValidationReport;

/// Largest number of cells a single table may hold.
pub const MAX_TABLE_CELLS: usize = 1 << 27;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum JoinStrategy {
    /// Enumerate every child pair per parent coloring.
    Naive,
    /// Stratify by the selected and high-color vertices and resolve the
    /// color-0/1 layer with one subset convolution per stratum.
    #[default]
    Convolution,
}

impl fmt::Display for JoinStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JoinStrategy::Naive => "naive",
            JoinStrategy::Convolution => "convolution",
        })
    }
}

impl FromStr for JoinStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(JoinStrategy::Naive),
            "convolution" => Ok(JoinStrategy::Convolution),
            other => Err(format!("unknown join strategy {other:?}")),
        }
    }
}

/// Ground-set size from which the convolution join resolves the low layer
/// with the ranked transforms; smaller layers enumerate the `3^m` disjoint
/// pairs directly, which is cheaper there and gives the same result. The
/// ranked transforms cost about `m² 2^m M` against `3^m`; timings at 14 to
/// 20 elements with value spreads of 1 to 4 put the break-even near 22.
pub const TRANSFORM_MIN_GROUND: usize = 22;

/// A join strategy together with its transform crossover.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JoinPlan {
    pub strategy: JoinStrategy,
    pub transform_min_ground: usize,
}

impl JoinPlan {
    /// Convolution joins that use the transforms for every ground set.
    pub fn always_transform() -> Self {
        JoinPlan {
            strategy: JoinStrategy::Convolution,
            transform_min_ground: 0,
        }
    }
}

impl From<JoinStrategy> for JoinPlan {
    fn from(strategy: JoinStrategy) -> Self {
        JoinPlan {
            strategy,
            transform_min_ground: TRANSFORM_MIN_GROUND,
        }
    }
}

/// Which tables survive evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Retention {
    /// Only the root table.
    RootOnly,
    /// The root and every join node; witness replay recomputes the
    /// introduce/forget chains in between from these.
    Witness,
    /// Every table.
    All,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveOptions {
    pub strategy: JoinStrategy,
    pub witness: bool,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("w must be at least 1")]
    ZeroW,
    #[error("decomposition is not a valid nice decomposition:\n{0}")]
    InvalidDecomposition(ValidationReport),
    #[error("table for a bag of {bag} vertices would need {cells} cells")]
    TableTooLarge { bag: usize, cells: String },
    #[error("bag mismatch: {0}")]
    BagMismatch(String),
    #[error("budget mismatch: {0} vs {1}")]
    BudgetMismatch(usize, usize),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Counters gathered during one evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    pub nodes: usize,
    pub table_cells: u64,
}

/// A sorted bag with its digit weights and position adjacency masks.
#[derive(Clone, Debug)]
pub(crate) struct BagLayout {
    pub bag: Vec<Vertex>,
    pub palette: Palette,
    pub powers: Vec<usize>,
    /// Bit `j` of `adj[i]` is set when bag positions `i` and `j` are adjacent.
    pub adj: Vec<u32>,
    pub cells: usize,
}

impl BagLayout {
    pub fn new(
        bag: &[Vertex],
        graph: &Graph,
        palette: Palette,
        extra: usize,
    ) -> Result<Self, SolveError> {
        let too_large = || SolveError::TableTooLarge {
            bag: bag.len(),
            cells: format!("{}^{} x {}", palette.radix(), bag.len(), extra),
        };
        if bag.len() >= 32 {
            return Err(too_large());
        }
        let cells = palette
            .table_len(bag.len())
            .and_then(|c| c.checked_mul(extra))
            .filter(|&c| c <= MAX_TABLE_CELLS)
            .ok_or_else(too_large)?;
        let adj = bag
            .iter()
            .map(|&u| {
                bag.iter()
                    .enumerate()
                    .filter(|&(_, &v)| graph.has_edge(u, v))
                    .fold(0u32, |m, (j, _)| m | (1 << j))
            })
            .collect();
        Ok(BagLayout {
            bag: bag.to_vec(),
            palette,
            powers: palette.powers(bag.len()),
            adj,
            cells: cells / extra,
        })
    }

    pub fn len(&self) -> usize {
        self.bag.len()
    }

    pub fn w(&self) -> usize {
        self.palette.w()
    }

    pub fn position(&self, v: Vertex) -> Option<usize> {
        self.bag.binary_search(&v).ok()
    }
}

/// Child color pairs allowed for one bag vertex at a join.
///
/// With parent color `s` and `sp` selected bag neighbors (capped at `w`):
/// if `s > sp` the children must supply `s - sp` further dominators between
/// them, giving `(a, s + sp - a)` for `sp <= a <= s`; otherwise the bag
/// already satisfies the requirement and both children take color `sp`.
#[derive(Clone, Debug)]
pub(crate) struct PairRule {
    w: usize,
    pairs: Vec<Vec<(usize, usize)>>,
}

impl PairRule {
    pub fn new(w: usize) -> Self {
        let mut pairs = Vec::with_capacity((w + 1) * (w + 1));
        for s in 0..=w {
            for sp in 0..=w {
                pairs.push(if s > sp {
                    (sp..=s).map(|a| (a, s + sp - a)).collect()
                } else {
                    vec![(sp, sp)]
                });
            }
        }
        PairRule { w, pairs }
    }

    pub fn pairs(&self, s: usize, selected_nbrs: usize) -> &[(usize, usize)] {
        let sp = selected_nbrs.min(self.w);
        &self.pairs[s * (self.w + 1) + sp]
    }
}

/// Calls `f` with the elementwise sum of one entry from each list, for
/// every combination, updating the sum incrementally.
pub(crate) fn for_each_sum<const N: usize>(
    lists: &[Vec<[usize; N]>],
    mut f: impl FnMut(&[usize; N]),
) {
    if lists.iter().any(Vec::is_empty) {
        return;
    }
    let mut choice = vec![0usize; lists.len()];
    let mut sum = [0usize; N];
    for list in lists {
        for (acc, x) in sum.iter_mut().zip(list[0]) {
            *acc += x;
        }
    }
    loop {
        f(&sum);
        let mut j = 0;
        loop {
            if j == lists.len() {
                return;
            }
            let old = lists[j][choice[j]];
            choice[j] += 1;
            if choice[j] == lists[j].len() {
                choice[j] = 0;
            }
            let new = lists[j][choice[j]];
            for ((acc, o), n) in sum.iter_mut().zip(old).zip(new) {
                *acc = *acc - o + n;
            }
            if choice[j] != 0 {
                break;
            }
            j += 1;
        }
    }
}

/// What an introduce node needs to know about one child coloring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct ChildColoring {
    pub index: usize,
    /// Selected neighbors of the introduced vertex.
    pub selected_nbrs: usize,
    /// Neighbors of the introduced vertex colored `w`.
    pub full_nbrs: usize,
    /// Index with every neighbor of positive finite color lowered by one.
    pub lowered: usize,
}

/// Visits the colorings of a bag of `len` positions in index order; `nbrs`
/// marks the positions adjacent to the vertex being introduced. Counters
/// are maintained incrementally as the digits roll over.
pub(crate) fn for_each_child_coloring(
    len: usize,
    palette: Palette,
    nbrs: u32,
    mut f: impl FnMut(ChildColoring),
) {
    let powers = palette.powers(len);
    let (w, sel, radix) = (palette.w(), palette.selected_code(), palette.radix());
    let mut digits = vec![0usize; len];
    let mut cur = ChildColoring {
        index: 0,
        selected_nbrs: 0,
        full_nbrs: 0,
        lowered: 0,
    };
    let apply = |cur: &mut ChildColoring, j: usize, d: usize, sign: isize| {
        if nbrs >> j & 1 == 1 {
            let step = |x: &mut usize, by: usize| *x = x.wrapping_add_signed(sign * by as isize);
            step(&mut cur.selected_nbrs, (d == sel) as usize);
            step(&mut cur.full_nbrs, (d == w) as usize);
            let kept = if (1..=w).contains(&d) { d - 1 } else { d };
            step(&mut cur.lowered, kept * powers[j]);
        } else {
            cur.lowered = cur
                .lowered
                .wrapping_add_signed(sign * (d * powers[j]) as isize);
        }
    };
    loop {
        f(cur);
        let mut j = 0;
        loop {
            if j == len {
                return;
            }
            let old = digits[j];
            apply(&mut cur, j, old, -1);
            let new = if old + 1 == radix { 0 } else { old + 1 };
            digits[j] = new;
            apply(&mut cur, j, new, 1);
            if new == 0 {
                cur.index -= old * powers[j];
                j += 1;
            } else {
                cur.index += powers[j];
                break;
            }
        }
    }
}

/// The parent colorings of a join that share one set of selected bag positions.
pub(crate) struct Stratum {
    pub selected_count: usize,
    /// Index contribution of the selected positions.
    pub base: usize,
    /// Unselected positions with their number of selected bag neighbors.
    pub free: Vec<(usize, usize)>,
}

impl Stratum {
    pub fn new(layout: &BagLayout, selected: u32) -> Self {
        let code = layout.palette.selected_code();
        let mut base = 0;
        let mut free = Vec::new();
        for i in 0..layout.len() {
            if selected >> i & 1 == 1 {
                base += code * layout.powers[i];
            } else {
                free.push((i, (layout.adj[i] & selected).count_ones() as usize));
            }
        }
        Stratum {
            selected_count: selected.count_ones() as usize,
            base,
            free,
        }
    }

    /// Child steps `[left offset, right offset, left is w, right is w]` for
    /// free position `(pos, sp)` under parent color `s`.
    pub fn steps(
        layout: &BagLayout,
        rule: &PairRule,
        pos: usize,
        sp: usize,
        s: usize,
    ) -> Vec<[usize; 4]> {
        let (w, p) = (layout.w(), layout.powers[pos]);
        rule.pairs(s, sp)
            .iter()
            .map(|&(a, b)| [a * p, b * p, (a == w) as usize, (b == w) as usize])
            .collect()
    }

    /// `[parent offset, left offset, right offset]` for every parent color in
    /// `colors` and each of its child pairs.
    pub fn triples(
        layout: &BagLayout,
        rule: &PairRule,
        pos: usize,
        sp: usize,
        colors: impl Iterator<Item = usize>,
    ) -> Vec<[usize; 3]> {
        let p = layout.powers[pos];
        colors
            .flat_map(|s| {
                rule.pairs(s, sp)
                    .iter()
                    .map(move |&(a, b)| [s * p, a * p, b * p])
            })
            .collect()
    }
}

/// Runs `work` once per selected-set mask, in parallel when the current
/// rayon pool has more than one thread, and replays the emitted
/// `(index, payload)` pairs into `sink` in mask order.
pub(crate) fn run_strata<T, S, W>(
    layout: &BagLayout,
    mut sink: impl FnMut(usize, T),
    init: impl Fn() -> S + Sync + Send,
    work: W,
) where
    T: Send,
    W: Fn(&mut S, &Stratum, &mut dyn FnMut(usize, T)) + Sync + Send,
{
    let masks = 1u32 << layout.len();
    if rayon::current_num_threads() <= 1 {
        let mut state = init();
        for mask in 0..masks {
            let stratum = Stratum::new(layout, mask);
            work(&mut state, &stratum, &mut |i, v| sink(i, v));
        }
        return;
    }
    use rayon::prelude::*;
    let chunks: Vec<Vec<(usize, T)>> = (0..masks)
        .into_par_iter()
        .map_init(&init, |state, mask| {
            let stratum = Stratum::new(layout, mask);
            let mut out = Vec::new();
            work(state, &stratum, &mut |i, v| out.push((i, v)));
            out
        })
        .collect();
    for chunk in chunks {
        for (i, v) in chunk {
            sink(i, v);
        }
    }
}

/// The four node operations of one table family.
pub(crate) trait TableOps {
    type Table: Clone;
    fn leaf(&self, bag: &[Vertex]) -> Result<Self::Table, SolveError>;
    fn introduce(
        &self,
        child: &Self::Table,
        x: Vertex,
        bag: &[Vertex],
    ) -> Result<Self::Table, SolveError>;
    fn forget(&self, child: &Self::Table, x: Vertex) -> Result<Self::Table, SolveError>;
    fn join(&self, left: &Self::Table, right: &Self::Table) -> Result<Self::Table, SolveError>;
    fn cells(table: &Self::Table) -> usize;

    fn step(
        &self,
        nd: &NiceDecomposition,
        id: usize,
        children: &[&Self::Table],
    ) -> Result<Self::Table, SolveError> {
        let node = nd.node(id);
        match node.kind {
            NodeKind::Leaf => self.leaf(&node.bag),
            NodeKind::Introduce(x) => self.introduce(children[0], x, &node.bag),
            NodeKind::Forget(x) => self.forget(children[0], x),
            NodeKind::Join => self.join(children[0], children[1]),
        }
    }
}

fn keep_flags(nd: &NiceDecomposition, retention: Retention) -> Vec<bool> {
    let mut keep = vec![retention == Retention::All; nd.len()];
    keep[nd.root()] = true;
    if retention == Retention::Witness {
        for (id, node) in nd.nodes().iter().enumerate() {
            if node.kind == NodeKind::Join {
                keep[id] = true;
            }
        }
    }
    keep
}

/// Per-node tables (`None` where dropped) with the run's counters.
pub(crate) type Evaluated<T> = (Vec<Option<T>>, RunStats);

/// Bottom-up evaluation; a table is dropped as soon as its parent is built
/// unless the retention policy keeps it.
pub(crate) fn evaluate_with<T: TableOps>(
    ops: &T,
    nd: &NiceDecomposition,
    retention: Retention,
) -> Result<Evaluated<T::Table>, SolveError> {
    let keep = keep_flags(nd, retention);
    let mut tables: Vec<Option<T::Table>> = vec![None; nd.len()];
    let mut stats = RunStats::default();
    for id in nd.postorder() {
        let node = nd.node(id);
        let table = {
            let children = node
                .children
                .iter()
                .map(|&c| {
                    tables[c]
                        .as_ref()
                        .ok_or_else(|| SolveError::Internal(format!("table of node {c} missing")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            ops.step(nd, id, &children)?
        };
        for &c in &node.children {
            if !keep[c] {
                tables[c] = None;
            }
        }
        stats.nodes += 1;
        stats.table_cells += T::cells(&table) as u64;
        tables[id] = Some(table);
    }
    Ok((tables, stats))
}

/// Serves tables during witness replay: retained ones directly, the rest by
/// recomputing the introduce/forget chain below them down to the nearest
/// retained table or leaf. Only the most recent chain is cached.
pub(crate) struct Replay<'a, T: TableOps> {
    ops: &'a T,
    nd: &'a NiceDecomposition,
    retained: &'a [Option<T::Table>],
    cache: HashMap<usize, T::Table>,
}

impl<'a, T: TableOps> Replay<'a, T> {
    pub fn new(ops: &'a T, nd: &'a NiceDecomposition, retained: &'a [Option<T::Table>]) -> Self {
        Replay {
            ops,
            nd,
            retained,
            cache: HashMap::new(),
        }
    }

    pub fn table(&mut self, id: usize) -> Result<T::Table, SolveError> {
        if let Some(t) = &self.retained[id] {
            return Ok(t.clone());
        }
        if let Some(t) = self.cache.get(&id) {
            return Ok(t.clone());
        }
        self.cache.clear();
        let mut chain = vec![id];
        let mut bottom = None;
        loop {
            let cur = *chain.last().expect("nonempty");
            let node = self.nd.node(cur);
            match node.kind {
                NodeKind::Leaf => break,
                NodeKind::Join => {
                    return Err(SolveError::Internal(format!(
                        "join node {cur} was not retained"
                    )));
                }
                _ => {
                    let c = node.children[0];
                    if let Some(t) = &self.retained[c] {
                        bottom = Some(t);
                        break;
                    }
                    chain.push(c);
                }
            }
        }
        let mut below = bottom.cloned();
        for &node in chain.iter().rev() {
            let t = match &below {
                Some(child) => self.ops.step(self.nd, node, &[child])?,
                None => self.ops.step(self.nd, node, &[])?,
            };
            self.cache.insert(node, t.clone());
            below = Some(t);
        }
        Ok(below.expect("chain is nonempty"))
    }
}
