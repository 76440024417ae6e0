//! Budgeted maximum coverage (L-Max w-domination) over a nice tree decomposition.
//!
//! Cell `(f, z)` holds the largest `|D| + (forgotten vertices outside D with
//! w neighbors in D) + |f⁻¹(w)|` over sets `D` of at most `z` processed
//! vertices that agree with `f` on the bag and meet every finite color as a
//! lower bound on selected neighbors. A bag vertex counts as covered only
//! while it carries color `w`; forget nodes and the root maximize over that
//! choice, so no coverage is lost. Infeasible cells hold `V::min_value()`.

use std::collections::BTreeSet;

use crate::coloring::{digit, insert_digit, remove_digit, Odometer, Palette};
use crate::dp::{
    evaluate_with, for_each_child_coloring, for_each_sum, run_strata, BagLayout, JoinPlan,
    JoinStrategy, PairRule, Replay, Retention, RunStats, SolveError, SolveOptions, Stratum,
    TableOps,
};
use crate::graph::{Graph, Vertex};
use crate::nice::{validate_structure, NiceDecomposition, NodeKind};
use crate::oracle::lmax_value;
use crate::subset_conv::{Mode, ShiftedConvolver};
use crate::value::DpValue;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LmaxTable<V> {
    bag: Vec<Vertex>,
    w: usize,
    budget: usize,
    values: Vec<V>,
}

impl<V: DpValue> LmaxTable<V> {
    pub fn infeasible() -> V {
        V::min_value()
    }

    pub fn bag(&self) -> &[Vertex] {
        &self.bag
    }

    pub fn w(&self) -> usize {
        self.w
    }

    /// The largest budget `L`; budgets run over `0..=L`.
    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn palette(&self) -> Palette {
        Palette::new(self.w)
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    /// Number of colorings.
    pub fn colorings(&self) -> usize {
        self.values.len() / (self.budget + 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, coloring: usize, z: usize) -> Option<i64> {
        let v = self.values[coloring * (self.budget + 1) + z];
        (v != Self::infeasible()).then(|| v.wide())
    }

    fn store(x: Option<i64>) -> V {
        x.map_or(Self::infeasible(), V::narrow)
    }
}

fn layout(bag: &[Vertex], graph: &Graph, w: usize, budget: usize) -> Result<BagLayout, SolveError> {
    if w == 0 {
        return Err(SolveError::ZeroW);
    }
    BagLayout::new(bag, graph, Palette::new(w), budget + 1)
}

fn selected_mask(digits: &[usize], sel: usize) -> u32 {
    digits
        .iter()
        .enumerate()
        .filter(|&(_, &d)| d == sel)
        .fold(0, |m, (i, _)| m | 1 << i)
}

pub fn lmax_leaf<V: DpValue>(
    bag: &[Vertex],
    graph: &Graph,
    w: usize,
    budget: usize,
) -> Result<LmaxTable<V>, SolveError> {
    let mut bag = bag.to_vec();
    bag.sort_unstable();
    let lay = layout(&bag, graph, w, budget)?;
    let sel = lay.palette.selected_code();
    let mut values = Vec::with_capacity(lay.cells * (budget + 1));
    let mut odo = Odometer::new(lay.len(), lay.palette.radix());
    while odo.advance() {
        let selected = selected_mask(&odo.digits, sel);
        let ok = odo
            .digits
            .iter()
            .enumerate()
            .all(|(i, &d)| d == sel || (lay.adj[i] & selected).count_ones() as usize >= d);
        let chosen = selected.count_ones() as usize;
        let full = odo.digits.iter().filter(|&&d| d == w).count();
        for z in 0..=budget {
            values.push(LmaxTable::<V>::store(
                (ok && chosen <= z).then_some((chosen + full) as i64),
            ));
        }
    }
    Ok(LmaxTable {
        bag,
        w,
        budget,
        values,
    })
}

/// Forget `x0`, which leaves the bag selected, uncounted (0) or counted (w).
pub fn lmax_forget<V: DpValue>(
    child: &LmaxTable<V>,
    x0: Vertex,
) -> Result<LmaxTable<V>, SolveError> {
    let pos = child
        .bag
        .binary_search(&x0)
        .map_err(|_| SolveError::BagMismatch(format!("forgotten vertex {x0} not in child bag")))?;
    let palette = child.palette();
    let powers = palette.powers(child.bag.len());
    let mut bag = child.bag.clone();
    bag.remove(pos);
    let colorings = palette
        .table_len(bag.len())
        .expect("smaller than the child table");
    let stride = child.budget + 1;
    let codes = [palette.selected_code(), 0, child.w];
    let mut values = Vec::with_capacity(colorings * stride);
    for idx in 0..colorings {
        let sources = codes.map(|d| insert_digit(idx, pos, d, &powers) * stride);
        for z in 0..stride {
            values.push(
                sources
                    .iter()
                    .map(|&s| child.values[s + z])
                    .max()
                    .expect("three sources"),
            );
        }
    }
    Ok(LmaxTable {
        bag,
        w: child.w,
        budget: child.budget,
        values,
    })
}

pub fn lmax_introduce<V: DpValue>(
    child: &LmaxTable<V>,
    x0: Vertex,
    bag: &[Vertex],
    graph: &Graph,
) -> Result<LmaxTable<V>, SolveError> {
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
    let (w, budget) = (child.w, child.budget);
    let lay = layout(bag, graph, w, budget)?;
    let pos = lay.position(x0).expect("x0 is in the bag");
    let sel = lay.palette.selected_code();
    let nbrs = (lay.adj[pos] & ((1 << pos) - 1)) | (lay.adj[pos] >> (pos + 1) << pos);
    let (lo, hi) = (lay.powers[pos], lay.powers[pos + 1]);
    let stride = budget + 1;
    let mut values = vec![LmaxTable::<V>::infeasible(); lay.cells * stride];
    for_each_child_coloring(child.bag.len(), lay.palette, nbrs, |c| {
        let at = c.index % lo + c.index / lo * hi;
        for d in 0..=w.min(c.selected_nbrs) {
            let gain = (d == w) as i64;
            for z in 0..stride {
                values[(at + d * lo) * stride + z] =
                    LmaxTable::<V>::store(child.value(c.index, z).map(|v| v + gain));
            }
        }
        // x0 selected: its w-colored neighbors become covered
        for z in 1..stride {
            let v = child
                .value(c.lowered, z - 1)
                .map(|v| v + 1 + c.full_nbrs as i64);
            values[(at + sel * lo) * stride + z] = LmaxTable::<V>::store(v);
        }
    });
    Ok(LmaxTable {
        bag: bag.to_vec(),
        w,
        budget,
        values,
    })
}

/// Budget splits `(z1, z2)` with both parts at least `r` and `z1 + z2 - r = z`.
fn splits(z: usize, r: usize, budget: usize) -> impl Iterator<Item = (usize, usize)> {
    let lo = r.max((z + r).saturating_sub(budget));
    (lo..=z.min(budget)).map(move |z1| (z1, z + r - z1))
}

/// Marks unavailable cells in the widened join buffers.
const NEG: i64 = -(1 << 60);

/// Per-worker buffers of the L-Max join.
struct LmaxScratch<V> {
    best: Vec<i64>,
    touched: Vec<usize>,
    offsets: Vec<usize>,
    g: Vec<i64>,
    h: Vec<i64>,
    acc: Vec<i64>,
    conv: ShiftedConvolver<V>,
}

impl<V> LmaxScratch<V> {
    fn new(cells: usize, transform_min_ground: usize) -> Self {
        LmaxScratch {
            best: vec![NEG; cells],
            touched: Vec::new(),
            offsets: Vec::new(),
            g: Vec::new(),
            h: Vec::new(),
            acc: Vec::new(),
            conv: ShiftedConvolver::with_threshold(transform_min_ground),
        }
    }

    fn offer(&mut self, cell: usize, v: i64) {
        let slot = &mut self.best[cell];
        if v > *slot {
            if *slot == NEG {
                self.touched.push(cell);
            }
            *slot = v;
        }
    }

    /// Emits the stratum's cells with the parent's own w-colored vertices added back.
    fn flush(
        &mut self,
        selected: usize,
        stride: usize,
        full: &[i64],
        out: &mut dyn FnMut(usize, i64),
    ) {
        for cell in self.touched.drain(..) {
            out(
                cell,
                self.best[cell] - selected as i64 + full[cell / stride],
            );
            self.best[cell] = NEG;
        }
    }
}

/// Number of w-colored positions of every coloring.
fn full_counts(lay: &BagLayout) -> Vec<i64> {
    let (radix, w) = (lay.palette.radix(), lay.w());
    let mut full = vec![0i64; lay.cells];
    for idx in 1..lay.cells {
        full[idx] = full[idx / radix] + (idx % radix == w) as i64;
    }
    full
}

/// Child values widened to `i64`, net of the child's w-colored vertices.
fn net_values<V: DpValue>(t: &LmaxTable<V>, full: &[i64]) -> Vec<i64> {
    let stride = t.budget + 1;
    t.values
        .iter()
        .enumerate()
        .map(|(cell, &v)| {
            if v == LmaxTable::<V>::infeasible() {
                NEG
            } else {
                v.wide() - full[cell / stride]
            }
        })
        .collect()
}

pub fn lmax_join<V: DpValue>(
    left: &LmaxTable<V>,
    right: &LmaxTable<V>,
    graph: &Graph,
    plan: impl Into<JoinPlan>,
) -> Result<LmaxTable<V>, SolveError> {
    let plan = plan.into();
    if left.bag != right.bag || left.w != right.w {
        return Err(SolveError::BagMismatch("join children differ".into()));
    }
    if left.budget != right.budget {
        return Err(SolveError::BudgetMismatch(left.budget, right.budget));
    }
    let budget = left.budget;
    let stride = budget + 1;
    let lay = layout(&left.bag, graph, left.w, budget)?;
    let rule = PairRule::new(lay.w());
    let full = full_counts(&lay);
    let (lv, rv) = (net_values(left, &full), net_values(right, &full));
    let mut values = vec![LmaxTable::<V>::infeasible(); lay.cells * stride];
    let sink = |cell: usize, v: i64| values[cell] = V::narrow(v);
    let init = || LmaxScratch::<V>::new(lay.cells * stride, plan.transform_min_ground);
    let joined = Joined {
        lay: &lay,
        rule: &rule,
        lv: &lv,
        rv: &rv,
        budget,
    };
    match plan.strategy {
        JoinStrategy::Naive => run_strata(&lay, sink, init, |scratch, st, out| {
            joined.naive_stratum(st, scratch);
            scratch.flush(st.selected_count, stride, &full, out);
        }),
        JoinStrategy::Convolution => run_strata(&lay, sink, init, |scratch, st, out| {
            joined.convolution_stratum(st, scratch);
            scratch.flush(st.selected_count, stride, &full, out);
        }),
    }
    Ok(LmaxTable {
        bag: left.bag.clone(),
        w: left.w,
        budget,
        values,
    })
}

/// The inputs of one join, shared by the strata.
struct Joined<'a> {
    lay: &'a BagLayout,
    rule: &'a PairRule,
    lv: &'a [i64],
    rv: &'a [i64],
    budget: usize,
}

impl Joined<'_> {
    fn naive_stratum<V>(&self, st: &Stratum, scratch: &mut LmaxScratch<V>) {
        let (w, budget, r) = (self.lay.w(), self.budget, st.selected_count);
        if r > budget {
            return;
        }
        let stride = budget + 1;
        let lists: Vec<Vec<[usize; 3]>> = st
            .free
            .iter()
            .map(|&(pos, sp)| Stratum::triples(self.lay, self.rule, pos, sp, 0..=w))
            .collect();
        let base = st.base;
        for_each_sum(&lists, |&[p, l, rr]| {
            let (lrow, rrow) = ((base + l) * stride, (base + rr) * stride);
            let prow = (base + p) * stride;
            for z1 in r..=budget {
                let a = self.lv[lrow + z1];
                if a == NEG {
                    continue;
                }
                for z2 in r..=budget + r - z1 {
                    let b = self.rv[rrow + z2];
                    if b != NEG {
                        scratch.offer(prow + z1 + z2 - r, a + b);
                    }
                }
            }
        });
    }

    /// As in the minimization join: open positions (no selected bag
    /// neighbor) either join the low layer, where parent colors 0/1 are
    /// resolved by a max-sum convolution per budget split, or take a fixed
    /// color from 2..=w.
    fn convolution_stratum<V: DpValue>(&self, st: &Stratum, scratch: &mut LmaxScratch<V>) {
        let (lay, w, budget, r) = (self.lay, self.lay.w(), self.budget, st.selected_count);
        if r > budget {
            return;
        }
        let stride = budget + 1;
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
                    Some(_) => lists.push(Stratum::triples(lay, self.rule, pos, sp, 2..=w)),
                    None => lists.push(Stratum::triples(lay, self.rule, pos, sp, 0..=w)),
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
            let LmaxScratch {
                best,
                touched,
                offsets,
                g,
                h,
                acc,
                conv,
            } = scratch;
            for_each_sum(&lists, |&[p, l, rr]| {
                // g[a * stride + z]: left value at low subset a, budget z
                g.clear();
                h.clear();
                for &o in offsets.iter() {
                    let (lrow, rrow) = ((base + l + o) * stride, (base + rr + o) * stride);
                    g.extend_from_slice(&self.lv[lrow..lrow + stride]);
                    h.extend_from_slice(&self.rv[rrow..rrow + stride]);
                }
                acc.clear();
                acc.resize(size * stride, NEG);
                if transform {
                    let column = |t: &[i64], z: usize| -> Vec<Option<i64>> {
                        (0..size)
                            .map(|a| Some(t[a * stride + z]).filter(|&v| v != NEG))
                            .collect()
                    };
                    for z1 in r..=budget {
                        let gz = column(g, z1);
                        for z2 in r..=budget + r - z1 {
                            let hz = column(h, z2);
                            let z = z1 + z2 - r;
                            conv.run(Mode::Max, m, &gz, &hz, |y, v| {
                                let slot = &mut acc[y * stride + z];
                                *slot = (*slot).max(v);
                            });
                        }
                    }
                } else {
                    for y in 0..size {
                        let out = &mut acc[y * stride..(y + 1) * stride];
                        let mut a = y;
                        loop {
                            let (ga, hb) = (&g[a * stride..], &h[(y ^ a) * stride..]);
                            for z1 in r..=budget {
                                let x = ga[z1];
                                if x == NEG {
                                    continue;
                                }
                                for z2 in r..=budget + r - z1 {
                                    let v = hb[z2];
                                    if v != NEG {
                                        let slot = &mut out[z1 + z2 - r];
                                        *slot = (*slot).max(x + v);
                                    }
                                }
                            }
                            if a == 0 {
                                break;
                            }
                            a = (a - 1) & y;
                        }
                    }
                }
                for (y, chunk) in acc.chunks(stride).enumerate() {
                    let row = (base + p + offsets[y]) * stride;
                    for (z, &v) in chunk.iter().enumerate() {
                        if v != NEG {
                            let slot = &mut best[row + z];
                            if v > *slot {
                                if *slot == NEG {
                                    touched.push(row + z);
                                }
                                *slot = v;
                            }
                        }
                    }
                }
            });
        }
    }
}

/// Best root coloring for budget `z`, maximizing over selected / 0 / w on
/// every remaining bag vertex.
pub fn lmax_root_optimum<V: DpValue>(table: &LmaxTable<V>, z: usize) -> Option<(usize, i64)> {
    let palette = table.palette();
    let powers = palette.powers(table.bag.len());
    let codes = [palette.selected_code(), 0, table.w];
    let mut odo = Odometer::new(table.bag.len(), 3);
    let mut best: Option<(usize, i64)> = None;
    while odo.advance() {
        let idx: usize = odo
            .digits
            .iter()
            .enumerate()
            .map(|(i, &c)| codes[c] * powers[i])
            .sum();
        if let Some(v) = table.value(idx, z) {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((idx, v));
            }
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct LmaxTables<V> {
    pub tables: Vec<Option<LmaxTable<V>>>,
    pub w: usize,
    pub budget: usize,
    pub plan: JoinPlan,
    pub stats: RunStats,
}

impl<V: DpValue> LmaxTables<V> {
    pub fn table(&self, node: usize) -> Option<&LmaxTable<V>> {
        self.tables[node].as_ref()
    }
}

struct LmaxOps<'g, V> {
    graph: &'g Graph,
    w: usize,
    budget: usize,
    plan: JoinPlan,
    _cell: std::marker::PhantomData<V>,
}

impl<V: DpValue> TableOps for LmaxOps<'_, V> {
    type Table = LmaxTable<V>;

    fn leaf(&self, bag: &[Vertex]) -> Result<Self::Table, SolveError> {
        lmax_leaf(bag, self.graph, self.w, self.budget)
    }

    fn introduce(
        &self,
        child: &Self::Table,
        x: Vertex,
        bag: &[Vertex],
    ) -> Result<Self::Table, SolveError> {
        lmax_introduce(child, x, bag, self.graph)
    }

    fn forget(&self, child: &Self::Table, x: Vertex) -> Result<Self::Table, SolveError> {
        lmax_forget(child, x)
    }

    fn join(&self, left: &Self::Table, right: &Self::Table) -> Result<Self::Table, SolveError> {
        lmax_join(left, right, self.graph, self.plan)
    }

    fn cells(table: &Self::Table) -> usize {
        table.len()
    }
}

/// Bottom-up evaluation; `budget` is clamped to the vertex count.
pub fn evaluate_lmax<V: DpValue>(
    graph: &Graph,
    nd: &NiceDecomposition,
    w: usize,
    budget: usize,
    plan: impl Into<JoinPlan>,
    retention: Retention,
) -> Result<LmaxTables<V>, SolveError> {
    let plan = plan.into();
    if w == 0 {
        return Err(SolveError::ZeroW);
    }
    let report = validate_structure(nd, graph);
    if !report.is_valid() {
        return Err(SolveError::InvalidDecomposition(report));
    }
    let budget = budget.min(graph.vertex_count());
    let ops = LmaxOps::<V> {
        graph,
        w,
        budget,
        plan,
        _cell: std::marker::PhantomData,
    };
    let (tables, stats) = evaluate_with(&ops, nd, retention)?;
    Ok(LmaxTables {
        tables,
        w,
        budget,
        plan,
        stats,
    })
}

/// Replays the tables from the root, starting at the smallest budget
/// that reaches the optimum. Forget nodes try w, then 0, then selected.
pub fn extract_lmax_witness<V: DpValue>(
    graph: &Graph,
    nd: &NiceDecomposition,
    tables: &LmaxTables<V>,
) -> Result<Vec<Vertex>, SolveError> {
    let (w, budget) = (tables.w, tables.budget);
    let ops = LmaxOps::<V> {
        graph,
        w,
        budget,
        plan: tables.plan,
        _cell: std::marker::PhantomData,
    };
    let mut replay = Replay::new(&ops, nd, &tables.tables);
    let root_table = &replay.table(nd.root())?;
    let (_, optimum) = lmax_root_optimum(root_table, budget)
        .ok_or_else(|| SolveError::Internal("root has no feasible cell".into()))?;
    let (z0, (root_idx, _)) = (0..=budget)
        .find_map(|z| {
            lmax_root_optimum(root_table, z)
                .filter(|&(_, v)| v == optimum)
                .map(|c| (z, c))
        })
        .expect("the full budget reaches the optimum");
    let palette = Palette::new(w);
    let sel = palette.selected_code();
    let rule = PairRule::new(w);
    let mut chosen = BTreeSet::new();
    let mut stack = vec![(nd.root(), root_idx, z0, optimum)];
    while let Some((id, idx, z, target)) = stack.pop() {
        let node = nd.node(id);
        let lay = layout(&node.bag, graph, w, budget)?;
        let radix = lay.palette.radix();
        let colors: Vec<usize> = (0..node.bag.len())
            .map(|i| digit(idx, i, &lay.powers, radix))
            .collect();
        for (i, &v) in node.bag.iter().enumerate() {
            if colors[i] == sel {
                chosen.insert(v);
            }
        }
        match node.kind {
            NodeKind::Leaf => {}
            NodeKind::Introduce(x) => {
                let pos = lay.position(x).expect("x0 in bag");
                let below = remove_digit(idx, pos, &lay.powers);
                let c = node.children[0];
                if colors[pos] == sel {
                    let child_powers = palette.powers(node.bag.len() - 1);
                    let mut lowered = below;
                    let mut completed = 0;
                    for (q, &col) in colors.iter().enumerate() {
                        if q != pos && lay.adj[pos] >> q & 1 == 1 && col != sel && col > 0 {
                            lowered -= child_powers[if q < pos { q } else { q - 1 }];
                            completed += (col == w) as i64;
                        }
                    }
                    stack.push((c, lowered, z - 1, target - 1 - completed));
                } else {
                    stack.push((c, below, z, target - (colors[pos] == w) as i64));
                }
            }
            NodeKind::Forget(x) => {
                let c = node.children[0];
                let child = replay.table(c)?;
                let pos = child.bag.binary_search(&x).expect("x0 in child bag");
                let powers = palette.powers(child.bag.len());
                let pick = [w, 0, sel]
                    .into_iter()
                    .map(|d| insert_digit(idx, pos, d, &powers))
                    .find(|&ci| child.value(ci, z) == Some(target))
                    .ok_or_else(|| {
                        SolveError::Internal(format!("no child entry explains forget node {id}"))
                    })?;
                stack.push((c, pick, z, target));
            }
            NodeKind::Join => {
                let (lc, rc) = (node.children[0], node.children[1]);
                let left = replay.table(lc)?;
                let right = replay.table(rc)?;
                let st = Stratum::new(&lay, selected_mask(&colors, sel));
                let r = st.selected_count;
                let full = colors.iter().filter(|&&c| c == w).count() as i64;
                let lists: Vec<Vec<[usize; 4]>> = st
                    .free
                    .iter()
                    .map(|&(pos, sp)| Stratum::steps(&lay, &rule, pos, sp, colors[pos]))
                    .collect();
                let mut found = None;
                for_each_sum(&lists, |&[l, rr, lf, rf]| {
                    if found.is_some() {
                        return;
                    }
                    for (z1, z2) in splits(z, r, budget) {
                        if let (Some(a), Some(b)) =
                            (left.value(st.base + l, z1), right.value(st.base + rr, z2))
                        {
                            if a + b - r as i64 - lf as i64 - rf as i64 + full == target {
                                found = Some([(lc, st.base + l, z1, a), (rc, st.base + rr, z2, b)]);
                                return;
                            }
                        }
                    }
                });
                let [lt, rt] = found.ok_or_else(|| {
                    SolveError::Internal(format!("no child pair explains join node {id}"))
                })?;
                stack.push(rt);
                stack.push(lt);
            }
        }
    }
    Ok(chosen.into_iter().collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LmaxSolution {
    pub value: usize,
    /// The budget after clamping to the vertex count.
    pub budget: usize,
    pub witness: Option<Vec<Vertex>>,
    pub stats: RunStats,
}

pub fn solve_lmax(
    graph: &Graph,
    nd: &NiceDecomposition,
    w: usize,
    budget: usize,
    strategy: JoinStrategy,
) -> Result<LmaxSolution, SolveError> {
    solve_lmax_with(
        graph,
        nd,
        w,
        budget,
        &SolveOptions {
            strategy,
            witness: true,
        },
    )
}

pub fn solve_lmax_with(
    graph: &Graph,
    nd: &NiceDecomposition,
    w: usize,
    budget: usize,
    opts: &SolveOptions,
) -> Result<LmaxSolution, SolveError> {
    let n = graph.vertex_count() as i64;
    if n < i16::finite_limit() {
        solve_lmax_as::<i16>(graph, nd, w, budget, opts)
    } else if n < i32::finite_limit() {
        solve_lmax_as::<i32>(graph, nd, w, budget, opts)
    } else {
        solve_lmax_as::<i64>(graph, nd, w, budget, opts)
    }
}

pub fn solve_lmax_as<V: DpValue>(
    graph: &Graph,
    nd: &NiceDecomposition,
    w: usize,
    budget: usize,
    opts: &SolveOptions,
) -> Result<LmaxSolution, SolveError> {
    let retention = if opts.witness {
        Retention::Witness
    } else {
        Retention::RootOnly
    };
    let tables = evaluate_lmax::<V>(graph, nd, w, budget, opts.strategy, retention)?;
    let root = tables.table(nd.root()).expect("root table is always kept");
    let (_, value) = lmax_root_optimum(root, tables.budget)
        .ok_or_else(|| SolveError::Internal("the empty set is always feasible".into()))?;
    let witness = if opts.witness {
        let set = extract_lmax_witness(graph, nd, &tables)?;
        let score = lmax_value(graph, &set, w).map_err(|e| SolveError::Internal(e.to_string()))?;
        if set.len() > tables.budget || score as i64 != value {
            return Err(SolveError::Internal(format!(
                "witness {set:?} scores {score}, expected {value}"
            )));
        }
        Some(set)
    } else {
        None
    };
    Ok(LmaxSolution {
        value: value as usize,
        budget: tables.budget,
        witness,
        stats: tables.stats,
    })
}
