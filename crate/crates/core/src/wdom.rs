//! Minimum w-dominating set over a nice tree decomposition.
//!
//! For a node `t` and a coloring `f` of its bag, the table stores the size of
//! a smallest set `D` inside the subgraph processed below `t` such that
//! `D ∩ bag = f⁻¹(selected)`, every forgotten vertex outside `D` has at least
//! `w` neighbors in `D`, and every unselected bag vertex `x` has at least
//! `f(x)` neighbors in `D`. Infeasible cells hold `V::max_value()`.

use std::collections::BTreeSet;

use crate::coloring::{digit, insert_digit, remove_digit, Coloring, Odometer, Palette};
use crate::dp::{
    evaluate_with, for_each_child_coloring, for_each_sum, run_strata, BagLayout, JoinPlan,
    JoinStrategy, PairRule, Replay, Retention, RunStats, SolveError, SolveOptions, Stratum,
    TableOps,
};
use crate::graph::{Graph, Vertex};
use crate::nice::{validate_structure, NiceDecomposition, NodeKind};
use crate::oracle::is_w_dominating;
use crate::subset_conv::{Mode, ShiftedConvolver};
use crate::value::DpValue;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WdsTable<V> {
    bag: Vec<Vertex>,
    w: usize,
    values: Vec<V>,
}

impl<V: DpValue> WdsTable<V> {
    pub fn infeasible() -> V {
        V::max_value()
    }

    pub fn bag(&self) -> &[Vertex] {
        &self.bag
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn palette(&self) -> Palette {
        Palette::new(self.w)
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Cell value, `None` when infeasible.
    pub fn value(&self, index: usize) -> Option<i64> {
        let v = self.values[index];
        (v != Self::infeasible()).then(|| v.wide())
    }

    pub fn value_of(&self, coloring: &Coloring) -> Option<i64> {
        self.value(coloring.encode(&self.palette()))
    }

    fn store(x: Option<i64>) -> V {
        x.map_or(Self::infeasible(), V::narrow)
    }
}

fn layout(bag: &[Vertex], graph: &Graph, w: usize) -> Result<BagLayout, SolveError> {
    if w == 0 {
        return Err(SolveError::ZeroW);
    }
    BagLayout::new(bag, graph, Palette::new(w), 1)
}

/// Table of a leaf whose bag may be nonempty.
pub fn leaf_table<V: DpValue>(
    bag: &[Vertex],
    graph: &Graph,
    w: usize,
) -> Result<WdsTable<V>, SolveError> {
    let mut bag = bag.to_vec();
    bag.sort_unstable();
    let lay = layout(&bag, graph, w)?;
    let sel = lay.palette.selected_code();
    let mut values = Vec::with_capacity(lay.cells);
    let mut odo = Odometer::new(lay.len(), lay.palette.radix());
    while odo.advance() {
        let selected = odo
            .digits
            .iter()
            .enumerate()
            .filter(|&(_, &d)| d == sel)
            .fold(0u32, |m, (i, _)| m | 1 << i);
        let ok = odo
            .digits
            .iter()
            .enumerate()
            .all(|(i, &d)| d == sel || (lay.adj[i] & selected).count_ones() as usize >= d);
        values.push(WdsTable::<V>::store(
            ok.then(|| selected.count_ones() as i64),
        ));
    }
    Ok(WdsTable { bag, w, values })
}

/// Forget `x0`: it must end up selected or with `w` selected neighbors.
pub fn forget_step<V: DpValue>(child: &WdsTable<V>, x0: Vertex) -> Result<WdsTable<V>, SolveError> {
    let pos = child
        .bag
        .binary_search(&x0)
        .map_err(|_| SolveError::BagMismatch(format!("forgotten vertex {x0} not in child bag")))?;
    let palette = child.palette();
    let powers = palette.powers(child.bag.len());
    let mut bag = child.bag.clone();
    bag.remove(pos);
    let cells = palette
        .table_len(bag.len())
        .expect("smaller than the child table");
    let (sel, w) = (palette.selected_code(), child.w);
    let values = (0..cells)
        .map(|idx| {
            let a = child.values[insert_digit(idx, pos, sel, &powers)];
            let b = child.values[insert_digit(idx, pos, w, &powers)];
            a.min(b)
        })
        .collect();
    Ok(WdsTable { bag, w, values })
}

/// Introduce `x0` into `bag`, which must equal the child's bag plus `x0`.
pub fn introduce_step<V: DpValue>(
    child: &WdsTable<V>,
    x0: Vertex,
    bag: &[Vertex],
    graph: &Graph,
) -> Result<WdsTable<V>, SolveError> {
    let mut expect = child.bag.clone();
    match expect.binary_search(&x0) {
        Ok(_) => {
            return Err(SolveError::BagMismatch(format!(
                "introduced vertex {x0} already in child bag"
            )))
        }
        Err(at) => expect.insert(at, x0),
    }
    if expect != bag {
        return Err(SolveError::BagMismatch(format!(
            "introduce bag {bag:?} is not {expect:?}"
        )));
    }
    let w = child.w;
    let lay = layout(bag, graph, w)?;
    let pos = lay.position(x0).expect("x0 is in the bag");
    let sel = lay.palette.selected_code();
    // adjacency of x0 in child positions
    let nbrs = (lay.adj[pos] & ((1 << pos) - 1)) | (lay.adj[pos] >> (pos + 1) << pos);
    let (lo, hi) = (lay.powers[pos], lay.powers[pos + 1]);
    let mut values = vec![WdsTable::<V>::infeasible(); lay.cells];
    for_each_child_coloring(child.bag.len(), lay.palette, nbrs, |c| {
        let at = c.index % lo + c.index / lo * hi;
        let kept = child.values[c.index];
        for d in 0..=w.min(c.selected_nbrs) {
            values[at + d * lo] = kept;
        }
        // x0 selected: each bag neighbor with a positive requirement gets one dominator
        let below = child.values[c.lowered];
        if below != WdsTable::<V>::infeasible() {
            values[at + sel * lo] = V::narrow(below.wide() + 1);
        }
    });
    Ok(WdsTable {
        bag: bag.to_vec(),
        w,
        values,
    })
}

/// Stand-in for infeasible cells in the widened join buffers; sums of two
/// of them stay far below `i64::MAX`.
const FAR: i64 = 1 << 60;

/// Per-thread buffers of a join.
struct JoinScratch<V> {
    best: Vec<i64>,
    touched: Vec<usize>,
    offsets: Vec<usize>,
    g: Vec<i64>,
    h: Vec<i64>,
    acc: Vec<i64>,
    conv: ShiftedConvolver<V>,
}

impl<V> JoinScratch<V> {
    fn new(cells: usize, transform_min_ground: usize) -> Self {
        JoinScratch {
            best: vec![FAR; cells],
            touched: Vec::new(),
            offsets: Vec::new(),
            g: Vec::new(),
            h: Vec::new(),
            acc: Vec::new(),
            conv: ShiftedConvolver::with_threshold(transform_min_ground),
        }
    }

    fn offer(&mut self, idx: usize, v: i64) {
        let slot = &mut self.best[idx];
        if v < *slot {
            if *slot == FAR {
                self.touched.push(idx);
            }
            *slot = v;
        }
    }

    fn flush(&mut self, selected: usize, out: &mut dyn FnMut(usize, i64)) {
        for idx in self.touched.drain(..) {
            out(idx, self.best[idx] - selected as i64);
            self.best[idx] = FAR;
        }
    }
}

fn widened<V: DpValue>(t: &WdsTable<V>) -> Vec<i64> {
    t.values
        .iter()
        .map(|&v| {
            if v == WdsTable::<V>::infeasible() {
                FAR
            } else {
                v.wide()
            }
        })
        .collect()
}

/// Combine two children that share the parent's bag.
pub fn join_step<V: DpValue>(
    left: &WdsTable<V>,
    right: &WdsTable<V>,
    graph: &Graph,
    plan: impl Into<JoinPlan>,
) -> Result<WdsTable<V>, SolveError> {
    let plan = plan.into();
    if left.bag != right.bag || left.w != right.w {
        return Err(SolveError::BagMismatch("join children differ".into()));
    }
    let lay = layout(&left.bag, graph, left.w)?;
    let rule = PairRule::new(lay.w());
    let (lv, rv) = (widened(left), widened(right));
    let mut values = vec![WdsTable::<V>::infeasible(); lay.cells];
    let sink = |idx: usize, v: i64| values[idx] = V::narrow(v);
    let init = || JoinScratch::<V>::new(lay.cells, plan.transform_min_ground);
    match plan.strategy {
        JoinStrategy::Naive => run_strata(&lay, sink, init, |scratch, st, out| {
            naive_stratum(&lay, &rule, &lv, &rv, st, scratch);
            scratch.flush(st.selected_count, out);
        }),
        JoinStrategy::Convolution => run_strata(&lay, sink, init, |scratch, st, out| {
            convolution_stratum(&lay, &rule, &lv, &rv, st, scratch);
            scratch.flush(st.selected_count, out);
        }),
    }
    Ok(WdsTable {
        bag: left.bag.clone(),
        w: left.w,
        values,
    })
}

fn naive_stratum<V>(
    lay: &BagLayout,
    rule: &PairRule,
    lv: &[i64],
    rv: &[i64],
    st: &Stratum,
    scratch: &mut JoinScratch<V>,
) {
    let w = lay.w();
    let lists: Vec<Vec<[usize; 3]>> = st
        .free
        .iter()
        .map(|&(pos, sp)| Stratum::triples(lay, rule, pos, sp, 0..=w))
        .collect();
    let base = st.base;
    for_each_sum(&lists, |&[p, l, r]| {
        scratch.offer(base + p, lv[base + l] + rv[base + r]);
    });
}

/// Unselected positions without selected bag neighbors may take the "low"
/// option (parent color 0 or 1), which the convolution resolves; every other
/// position gets a fixed parent color with its pair list. The low set ranges
/// over all subsets of those positions (just the full set when w = 1).
fn convolution_stratum<V: DpValue>(
    lay: &BagLayout,
    rule: &PairRule,
    lv: &[i64],
    rv: &[i64],
    st: &Stratum,
    scratch: &mut JoinScratch<V>,
) {
    let w = lay.w();
    let open: Vec<usize> = (0..st.free.len()).filter(|&j| st.free[j].1 == 0).collect();
    let all = (1usize << open.len()) - 1;
    let first = if w == 1 { all } else { 0 };
    let base = st.base;
    for low_mask in first..=all {
        let mut low = Vec::new();
        let mut lists = Vec::new();
        for (j, &(pos, sp)) in st.free.iter().enumerate() {
            match open.iter().position(|&o| o == j) {
                Some(bit) if low_mask >> bit & 1 == 1 => low.push(lay.powers[pos]),
                Some(_) => lists.push(Stratum::triples(lay, rule, pos, sp, 2..=w)),
                None => lists.push(Stratum::triples(lay, rule, pos, sp, 0..=w)),
            }
        }
        let m = low.len();
        let size = 1usize << m;
        scratch.offsets.clear();
        scratch.offsets.push(0);
        for a in 1..size {
            let prev = scratch.offsets[a & (a - 1)];
            scratch
                .offsets
                .push(prev + low[a.trailing_zeros() as usize]);
        }
        let transform = m >= scratch.conv.transform_min_ground;
        let JoinScratch {
            best,
            touched,
            offsets,
            g,
            h,
            acc,
            conv,
        } = scratch;
        for_each_sum(&lists, |&[p, l, r]| {
            g.clear();
            h.clear();
            g.extend(offsets.iter().map(|&o| lv[base + l + o]));
            h.extend(offsets.iter().map(|&o| rv[base + r + o]));
            acc.clear();
            acc.resize(size, FAR);
            if transform {
                let opt = |x: &i64| (*x < FAR).then_some(*x);
                let go: Vec<Option<i64>> = g.iter().map(opt).collect();
                let ho: Vec<Option<i64>> = h.iter().map(opt).collect();
                conv.run(Mode::Min, m, &go, &ho, |y, v| acc[y] = v);
            } else {
                for y in 0..size {
                    let mut a = y;
                    let mut b = FAR;
                    loop {
                        b = b.min(g[a] + h[y ^ a]);
                        if a == 0 {
                            break;
                        }
                        a = (a - 1) & y;
                    }
                    acc[y] = b;
                }
            }
            for (y, &v) in acc.iter().enumerate() {
                if v < FAR {
                    let idx = base + p + offsets[y];
                    let slot = &mut best[idx];
                    if v < *slot {
                        if *slot == FAR {
                            touched.push(idx);
                        }
                        *slot = v;
                    }
                }
            }
        });
    }
}

/// Best value at a root whose bag may be nonempty: every bag vertex must be
/// selected or have `w` selected neighbors. Returns the coloring index too.
pub fn root_optimum<V: DpValue>(table: &WdsTable<V>) -> Option<(usize, i64)> {
    let palette = table.palette();
    let powers = palette.powers(table.bag.len());
    let (w, sel) = (table.w, palette.selected_code());
    (0..1usize << table.bag.len())
        .map(|mask| {
            (0..table.bag.len())
                .map(|i| if mask >> i & 1 == 1 { sel } else { w } * powers[i])
                .sum::<usize>()
        })
        .filter_map(|idx| table.value(idx).map(|v| (idx, v)))
        .min_by_key(|&(idx, v)| (v, idx))
}

/// Tables of one evaluation, indexed by nice-node id.
#[derive(Clone, Debug)]
pub struct WdsTables<V> {
    pub tables: Vec<Option<WdsTable<V>>>,
    pub w: usize,
    pub plan: JoinPlan,
    pub stats: RunStats,
}

impl<V: DpValue> WdsTables<V> {
    pub fn table(&self, node: usize) -> Option<&WdsTable<V>> {
        self.tables[node].as_ref()
    }
}

struct WdsOps<'g, V> {
    graph: &'g Graph,
    w: usize,
    plan: JoinPlan,
    _cell: std::marker::PhantomData<V>,
}

impl<V: DpValue> TableOps for WdsOps<'_, V> {
    type Table = WdsTable<V>;

    fn leaf(&self, bag: &[Vertex]) -> Result<Self::Table, SolveError> {
        leaf_table(bag, self.graph, self.w)
    }

    fn introduce(
        &self,
        child: &Self::Table,
        x: Vertex,
        bag: &[Vertex],
    ) -> Result<Self::Table, SolveError> {
        introduce_step(child, x, bag, self.graph)
    }

    fn forget(&self, child: &Self::Table, x: Vertex) -> Result<Self::Table, SolveError> {
        forget_step(child, x)
    }

    fn join(&self, left: &Self::Table, right: &Self::Table) -> Result<Self::Table, SolveError> {
        join_step(left, right, self.graph, self.plan)
    }

    fn cells(table: &Self::Table) -> usize {
        table.len()
    }
}

fn check_input(graph: &Graph, nd: &NiceDecomposition, w: usize) -> Result<(), SolveError> {
    if w == 0 {
        return Err(SolveError::ZeroW);
    }
    let report = validate_structure(nd, graph);
    if !report.is_valid() {
        return Err(SolveError::InvalidDecomposition(report));
    }
    Ok(())
}

/// Bottom-up evaluation of every node.
pub fn evaluate<V: DpValue>(
    graph: &Graph,
    nd: &NiceDecomposition,
    w: usize,
    plan: impl Into<JoinPlan>,
    retention: Retention,
) -> Result<WdsTables<V>, SolveError> {
    let plan = plan.into();
    check_input(graph, nd, w)?;
    let ops = WdsOps::<V> {
        graph,
        w,
        plan,
        _cell: std::marker::PhantomData,
    };
    let (tables, stats) = evaluate_with(&ops, nd, retention)?;
    Ok(WdsTables {
        tables,
        w,
        plan,
        stats,
    })
}

/// Replays the tables from the root down and collects the selected vertices
/// of one optimal set. Forget nodes prefer leaving the vertex unselected;
/// joins take the first optimal child pair in enumeration order.
pub fn extract_witness<V: DpValue>(
    graph: &Graph,
    nd: &NiceDecomposition,
    tables: &WdsTables<V>,
) -> Result<Vec<Vertex>, SolveError> {
    let w = tables.w;
    let ops = WdsOps::<V> {
        graph,
        w,
        plan: tables.plan,
        _cell: std::marker::PhantomData,
    };
    let mut replay = Replay::new(&ops, nd, &tables.tables);
    let root_table = replay.table(nd.root())?;
    let (root_idx, optimum) = root_optimum(&root_table)
        .ok_or_else(|| SolveError::Internal("root has no feasible coloring".into()))?;
    let palette = Palette::new(w);
    let sel = palette.selected_code();
    let rule = PairRule::new(w);
    let mut chosen = BTreeSet::new();
    let mut stack = vec![(nd.root(), root_idx, optimum)];
    while let Some((id, idx, target)) = stack.pop() {
        let node = nd.node(id);
        let lay = layout(&node.bag, graph, w)?;
        let radix = lay.palette.radix();
        for (i, &v) in node.bag.iter().enumerate() {
            if digit(idx, i, &lay.powers, radix) == sel {
                chosen.insert(v);
            }
        }
        match node.kind {
            NodeKind::Leaf => {}
            NodeKind::Introduce(x) => {
                let pos = lay.position(x).expect("x0 in bag");
                let below = remove_digit(idx, pos, &lay.powers);
                if digit(idx, pos, &lay.powers, radix) == sel {
                    let child_powers = palette.powers(node.bag.len() - 1);
                    let mut lowered = below;
                    for q in 0..node.bag.len() {
                        let c = digit(idx, q, &lay.powers, radix);
                        if q != pos && lay.adj[pos] >> q & 1 == 1 && c != sel && c > 0 {
                            lowered -= child_powers[if q < pos { q } else { q - 1 }];
                        }
                    }
                    stack.push((node.children[0], lowered, target - 1));
                } else {
                    stack.push((node.children[0], below, target));
                }
            }
            NodeKind::Forget(x) => {
                let c = node.children[0];
                let child = replay.table(c)?;
                let pos = child.bag.binary_search(&x).expect("x0 in child bag");
                let powers = palette.powers(child.bag.len());
                let pick = [w, sel]
                    .into_iter()
                    .map(|d| insert_digit(idx, pos, d, &powers))
                    .find(|&ci| child.value(ci) == Some(target))
                    .ok_or_else(|| {
                        SolveError::Internal(format!("no child entry explains forget node {id}"))
                    })?;
                stack.push((c, pick, target));
            }
            NodeKind::Join => {
                let (lc, rc) = (node.children[0], node.children[1]);
                let left = replay.table(lc)?;
                let right = replay.table(rc)?;
                let selected = (0..node.bag.len())
                    .filter(|&i| digit(idx, i, &lay.powers, radix) == sel)
                    .fold(0u32, |m, i| m | 1 << i);
                let st = Stratum::new(&lay, selected);
                let lists: Vec<Vec<[usize; 4]>> = st
                    .free
                    .iter()
                    .map(|&(pos, sp)| {
                        Stratum::steps(&lay, &rule, pos, sp, digit(idx, pos, &lay.powers, radix))
                    })
                    .collect();
                let mut found = None;
                for_each_sum(&lists, |&[l, r, _, _]| {
                    if found.is_some() {
                        return;
                    }
                    if let (Some(a), Some(b)) = (left.value(st.base + l), right.value(st.base + r))
                    {
                        if a + b - st.selected_count as i64 == target {
                            found = Some((st.base + l, a, st.base + r, b));
                        }
                    }
                });
                let (li, a, ri, b) = found.ok_or_else(|| {
                    SolveError::Internal(format!("no child pair explains join node {id}"))
                })?;
                stack.push((rc, ri, b));
                stack.push((lc, li, a));
            }
        }
    }
    Ok(chosen.into_iter().collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WdsSolution {
    pub size: usize,
    /// Sorted, 0-based; present when requested.
    pub witness: Option<Vec<Vertex>>,
    pub stats: RunStats,
}

/// Minimum w-dominating set size with a witness.
pub fn solve_wdom(
    graph: &Graph,
    nd: &NiceDecomposition,
    w: usize,
    strategy: JoinStrategy,
) -> Result<WdsSolution, SolveError> {
    solve_wdom_with(
        graph,
        nd,
        w,
        &SolveOptions {
            strategy,
            witness: true,
        },
    )
}

/// Picks the narrowest cell type that can hold every value for this graph.
pub fn solve_wdom_with(
    graph: &Graph,
    nd: &NiceDecomposition,
    w: usize,
    opts: &SolveOptions,
) -> Result<WdsSolution, SolveError> {
    let n = graph.vertex_count() as i64;
    if n < i16::finite_limit() {
        solve_wdom_as::<i16>(graph, nd, w, opts)
    } else if n < i32::finite_limit() {
        solve_wdom_as::<i32>(graph, nd, w, opts)
    } else {
        solve_wdom_as::<i64>(graph, nd, w, opts)
    }
}

pub fn solve_wdom_as<V: DpValue>(
    graph: &Graph,
    nd: &NiceDecomposition,
    w: usize,
    opts: &SolveOptions,
) -> Result<WdsSolution, SolveError> {
    let retention = if opts.witness {
        Retention::Witness
    } else {
        Retention::RootOnly
    };
    let tables = evaluate::<V>(graph, nd, w, opts.strategy, retention)?;
    let root = tables.table(nd.root()).expect("root table is always kept");
    let (_, size) = root_optimum(root)
        .ok_or_else(|| SolveError::Internal("selecting every vertex is always feasible".into()))?;
    let witness = if opts.witness {
        let set = extract_witness(graph, nd, &tables)?;
        let ok = set.len() as i64 == size
            && is_w_dominating(graph, &set, w).map_err(|e| SolveError::Internal(e.to_string()))?;
        if !ok {
            return Err(SolveError::Internal(format!(
                "witness {set:?} does not certify size {size}"
            )));
        }
        Some(set)
    } else {
        None
    };
    Ok(WdsSolution {
        size: size as usize,
        witness,
        stats: tables.stats,
    })
}
