//! Tree decompositions: elimination-order construction, validation and the
//! PACE `.td` text format.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Graph, Vertex};

/// A tree of bags. Bags are kept sorted and duplicate-free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    vertex_count: usize,
    bags: Vec<Vec<Vertex>>,
    edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    pub fn new(vertex_count: usize, bags: Vec<Vec<Vertex>>, edges: Vec<(usize, usize)>) -> Self {
        let bags = bags
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b.dedup();
                b
            })
            .collect();
        TreeDecomposition {
            vertex_count,
            bags,
            edges,
        }
    }

    /// The decomposition with a single bag holding every vertex.
    pub fn trivial(graph: &Graph) -> Self {
        Self::new(
            graph.vertex_count(),
            vec![graph.vertices().collect()],
            Vec::new(),
        )
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn node_count(&self) -> usize {
        self.bags.len()
    }

    pub fn bags(&self) -> &[Vec<Vertex>] {
        &self.bags
    }

    pub fn bag(&self, node: usize) -> &[Vertex] {
        &self.bags[node]
    }

    pub fn tree_edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Largest bag size minus one; `-1` for a decomposition without bags.
    pub fn width(&self) -> isize {
        self.bags
            .iter()
            .map(|b| b.len() as isize)
            .max()
            .unwrap_or(0)
            - 1
    }

    /// Sum of bag sizes.
    pub fn total_bag_size(&self) -> usize {
        self.bags.iter().map(Vec::len).sum()
    }

    /// Adjacency lists of the decomposition tree.
    pub fn tree_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.edges {
            if a < adj.len() && b < adj.len() {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

/// One problem found by a validator. Vertex and node ids are 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NotATree(String),
    BagVertexOutOfRange { node: usize, vertex: Vertex },
    VertexNotCovered(Vertex),
    VertexSubtreeDisconnected(Vertex),
    EdgeNotCovered(Vertex, Vertex),
    TooManyChildren { node: usize, children: usize },
    LeafNotEmpty(usize),
    RootNotEmpty,
    IntroduceMismatch(usize),
    ForgetMismatch(usize),
    JoinBagsUnequal(usize),
    KindMismatch(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotATree(why) => write!(f, "not a tree: {why}"),
            Violation::BagVertexOutOfRange { node, vertex } => {
                write!(
                    f,
                    "bag of node {node} holds vertex {vertex} outside the graph"
                )
            }
            Violation::VertexNotCovered(v) => write!(f, "vertex {v} is in no bag"),
            Violation::VertexSubtreeDisconnected(v) => {
                write!(f, "bags containing vertex {v} are not connected")
            }
            Violation::EdgeNotCovered(u, v) => write!(f, "edge {{{u},{v}}} uncovered"),
            Violation::TooManyChildren { node, children } => {
                write!(f, "node {node} has {children} children")
            }
            Violation::LeafNotEmpty(node) => write!(f, "leaf not empty at node {node}"),
            Violation::RootNotEmpty => write!(f, "root bag not empty"),
            Violation::IntroduceMismatch(node) => {
                write!(f, "introduce node {node} does not add exactly its vertex")
            }
            Violation::ForgetMismatch(node) => {
                write!(f, "forget node {node} does not drop exactly its vertex")
            }
            Violation::JoinBagsUnequal(node) => write!(f, "join bags unequal at node {node}"),
            Violation::KindMismatch(node) => {
                write!(
                    f,
                    "node {node} has a child count that does not match its kind"
                )
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks the tree shape, vertex and edge coverage, and that each vertex's
/// bags induce a connected subtree.
pub fn validate_td(graph: &Graph, td: &TreeDecomposition) -> ValidationReport {
    let mut report = ValidationReport::default();
    let nodes = td.node_count();
    let n = graph.vertex_count();

    let tree_ok = check_tree(nodes, td.tree_edges(), n, &mut report);

    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (node, bag) in td.bags().iter().enumerate() {
        for &v in bag {
            if v >= n {
                report.push(Violation::BagVertexOutOfRange { node, vertex: v });
            } else {
                holders[v].push(node);
            }
        }
    }
    for v in graph.vertices() {
        if holders[v].is_empty() {
            report.push(Violation::VertexNotCovered(v));
        }
    }
    for (u, v) in graph.edges() {
        let covered = holders[u]
            .iter()
            .any(|&node| td.bag(node).binary_search(&v).is_ok());
        if !covered {
            report.push(Violation::EdgeNotCovered(u, v));
        }
    }
    if tree_ok {
        // in a tree, the nodes holding v are connected iff they span
        // exactly (count - 1) tree edges
        let mut inner_edges = vec![0usize; n];
        for &(a, b) in td.tree_edges() {
            for v in sorted_intersection(td.bag(a), td.bag(b)) {
                if v < n {
                    inner_edges[v] += 1;
                }
            }
        }
        for v in graph.vertices() {
            if !holders[v].is_empty() && inner_edges[v] + 1 != holders[v].len() {
                report.push(Violation::VertexSubtreeDisconnected(v));
            }
        }
    }
    report
}

fn check_tree(
    nodes: usize,
    edges: &[(usize, usize)],
    n: usize,
    report: &mut ValidationReport,
) -> bool {
    if nodes == 0 {
        if n > 0 {
            report.push(Violation::NotATree("decomposition has no nodes".into()));
            return false;
        }
        return true;
    }
    for &(a, b) in edges {
        if a >= nodes || b >= nodes {
            report.push(Violation::NotATree(format!(
                "tree edge ({a},{b}) refers to a missing node"
            )));
            return false;
        }
        if a == b {
            report.push(Violation::NotATree(format!(
                "tree edge ({a},{b}) is a loop"
            )));
            return false;
        }
    }
    if edges.len() != nodes - 1 {
        report.push(Violation::NotATree(format!(
            "{} tree edges for {nodes} nodes",
            edges.len()
        )));
        return false;
    }
    let mut adj = vec![Vec::new(); nodes];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; nodes];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                reached += 1;
                queue.push_back(y);
            }
        }
    }
    if reached != nodes {
        report.push(Violation::NotATree(format!(
            "only {reached} of {nodes} nodes are connected"
        )));
        return false;
    }
    true
}

pub(crate) fn sorted_intersection<'a>(
    a: &'a [Vertex],
    b: &'a [Vertex],
) -> impl Iterator<Item = Vertex> + 'a {
    let (mut i, mut j) = (0, 0);
    std::iter::from_fn(move || {
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                    return Some(a[i - 1]);
                }
            }
        }
        None
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EliminationHeuristic {
    MinFill,
    MinDegree,
}

/// Elimination graph with an incrementally maintained priority per vertex.
struct Eliminator {
    adj: Vec<BTreeSet<Vertex>>,
    score: Vec<usize>,
    queue: BTreeSet<(usize, Vertex)>,
    heuristic: EliminationHeuristic,
}

impl Eliminator {
    fn new(graph: &Graph, heuristic: EliminationHeuristic) -> Self {
        let adj: Vec<BTreeSet<Vertex>> = graph
            .vertices()
            .map(|v| graph.neighbors(v).iter().copied().collect())
            .collect();
        let mut this = Eliminator {
            score: vec![0; adj.len()],
            adj,
            queue: BTreeSet::new(),
            heuristic,
        };
        for v in 0..this.adj.len() {
            let s = match heuristic {
                EliminationHeuristic::MinDegree => this.adj[v].len(),
                EliminationHeuristic::MinFill => this.fill_of(v),
            };
            this.score[v] = s;
            this.queue.insert((s, v));
        }
        this
    }

    fn fill_of(&self, v: Vertex) -> usize {
        let nbrs: Vec<Vertex> = self.adj[v].iter().copied().collect();
        let mut missing = 0;
        for (i, &x) in nbrs.iter().enumerate() {
            for &y in &nbrs[i + 1..] {
                if !self.adj[x].contains(&y) {
                    missing += 1;
                }
            }
        }
        missing
    }

    fn common(&self, x: Vertex, y: Vertex) -> Vec<Vertex> {
        let mut a = self.adj[x].iter().peekable();
        let mut b = self.adj[y].iter().peekable();
        let mut out = Vec::new();
        while let (Some(&&p), Some(&&q)) = (a.peek(), b.peek()) {
            match p.cmp(&q) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    out.push(p);
                    a.next();
                    b.next();
                }
            }
        }
        out
    }

    fn adjust(&mut self, v: Vertex, delta: isize) {
        if delta == 0 {
            return;
        }
        self.queue.remove(&(self.score[v], v));
        self.score[v] = (self.score[v] as isize + delta) as usize;
        self.queue.insert((self.score[v], v));
    }

    /// Removes the best vertex, returning it with its neighborhood at removal time.
    fn pop(&mut self) -> Option<(Vertex, Vec<Vertex>)> {
        let (_, v) = self.queue.pop_first()?;
        let nbrs: Vec<Vertex> = self.adj[v].iter().copied().collect();
        let min_fill = self.heuristic == EliminationHeuristic::MinFill;
        for (i, &x) in nbrs.iter().enumerate() {
            for &y in &nbrs[i + 1..] {
                if self.adj[x].contains(&y) {
                    continue;
                }
                if min_fill {
                    let common = self.common(x, y);
                    for &u in &common {
                        // the pair (x, y) stops being a missing edge around u
                        if u != v {
                            self.adjust(u, -1);
                        }
                    }
                    let shared = common.len() as isize;
                    self.adjust(x, self.adj[x].len() as isize - shared);
                    self.adjust(y, self.adj[y].len() as isize - shared);
                } else {
                    self.adjust(x, 1);
                    self.adjust(y, 1);
                }
                self.adj[x].insert(y);
                self.adj[y].insert(x);
            }
        }
        let k = nbrs.len();
        for &u in &nbrs {
            self.adj[u].remove(&v);
            match self.heuristic {
                // v's pairs with the non-neighbors of v around u disappear
                EliminationHeuristic::MinFill => {
                    let lost = self.adj[u].len() + 1 - k;
                    self.adjust(u, -(lost as isize));
                }
                EliminationHeuristic::MinDegree => self.adjust(u, -1),
            }
        }
        self.adj[v].clear();
        Some((v, nbrs))
    }
}

/// Builds a decomposition by vertex elimination. Node `i` holds the bag of the
/// `i`-th eliminated vertex; it is attached to the bag of its earliest-eliminated
/// remaining neighbor. Ties are broken by smallest vertex id.
pub fn decompose(graph: &Graph, heuristic: EliminationHeuristic) -> TreeDecomposition {
    let n = graph.vertex_count();
    let mut elim = Eliminator::new(graph, heuristic);
    let mut position = vec![usize::MAX; n];
    let mut bags = Vec::with_capacity(n);
    let mut later_nbrs = Vec::with_capacity(n);
    while let Some((v, nbrs)) = elim.pop() {
        position[v] = bags.len();
        let mut bag = nbrs.clone();
        bag.push(v);
        bags.push(bag);
        later_nbrs.push(nbrs);
    }
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut roots = Vec::new();
    for (node, nbrs) in later_nbrs.iter().enumerate() {
        match nbrs.iter().map(|&u| position[u]).min() {
            Some(parent) => edges.push((node, parent)),
            None => roots.push(node),
        }
    }
    // one root per connected component; chain them into a single tree
    if let Some((&last, rest)) = roots.split_last() {
        for &r in rest {
            edges.push((r, last));
        }
    }
    TreeDecomposition::new(n, bags, edges)
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct TdParseError {
    pub line: usize,
    pub message: String,
}

fn td_err(line: usize, message: impl Into<String>) -> TdParseError {
    TdParseError {
        line,
        message: message.into(),
    }
}

/// Parses the PACE `.td` format: `s td N W+1 n`, then `b i v…` bag lines and
/// `i j` tree edges, all 1-based.
pub fn parse_td(text: &str) -> Result<TreeDecomposition, TdParseError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut bags: Vec<Option<Vec<Vertex>>> = Vec::new();
    let mut edges = Vec::new();
    let mut last_line = 1;
    let num = |tok: &str, line: usize| -> Result<usize, TdParseError> {
        tok.parse::<usize>()
            .map_err(|_| td_err(line, format!("expected a number, found {tok:?}")))
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.is_empty() || tokens[0] == "c" {
            continue;
        }
        let Some((nodes, _, n)) = header else {
            if tokens.len() != 5 || tokens[0] != "s" || tokens[1] != "td" {
                return Err(td_err(line, "malformed header, expected `s td N W+1 n`"));
            }
            let h = (
                num(tokens[2], line)?,
                num(tokens[3], line)?,
                num(tokens[4], line)?,
            );
            bags = vec![None; h.0];
            header = Some(h);
            continue;
        };
        if tokens[0] == "b" {
            if tokens.len() < 2 {
                return Err(td_err(line, "bag line without an index"));
            }
            let idx = num(tokens[1], line)?;
            if idx == 0 || idx > nodes {
                return Err(td_err(
                    line,
                    format!("bag index {idx} out of range 1..={nodes}"),
                ));
            }
            if bags[idx - 1].is_some() {
                return Err(td_err(line, format!("bag {idx} defined twice")));
            }
            let mut bag = Vec::with_capacity(tokens.len() - 2);
            for tok in &tokens[2..] {
                let v = num(tok, line)?;
                if v == 0 || v > n {
                    return Err(td_err(line, format!("vertex {v} out of range 1..={n}")));
                }
                bag.push(v - 1);
            }
            bags[idx - 1] = Some(bag);
        } else {
            if tokens.len() != 2 {
                return Err(td_err(line, "expected a tree edge `i j`"));
            }
            let (a, b) = (num(tokens[0], line)?, num(tokens[1], line)?);
            for x in [a, b] {
                if x == 0 || x > nodes {
                    return Err(td_err(
                        line,
                        format!("bag index {x} out of range 1..={nodes}"),
                    ));
                }
            }
            edges.push((a - 1, b - 1));
        }
    }
    let Some((_, declared_size, n)) = header else {
        return Err(td_err(last_line, "missing `s td N W+1 n` header"));
    };
    let mut out = Vec::with_capacity(bags.len());
    for (i, bag) in bags.into_iter().enumerate() {
        out.push(bag.ok_or_else(|| td_err(last_line, format!("bag {} is never defined", i + 1)))?);
    }
    let td = TreeDecomposition::new(n, out, edges);
    let actual = (td.width() + 1) as usize;
    if actual != declared_size {
        return Err(td_err(
            last_line,
            format!("header declares bag size {declared_size} but the largest bag has {actual}"),
        ));
    }
    Ok(td)
}

/// Writes the PACE `.td` format with nodes in index order.
pub fn write_td(td: &TreeDecomposition) -> String {
    let mut out = format!(
        "s td {} {} {}\n",
        td.node_count(),
        td.width() + 1,
        td.vertex_count()
    );
    for (i, bag) in td.bags().iter().enumerate() {
        write!(out, "b {}", i + 1).unwrap();
        for &v in bag {
            write!(out, " {}", v + 1).unwrap();
        }
        out.push('\n');
    }
    for &(a, b) in td.tree_edges() {
        writeln!(out, "{} {}", a + 1, b + 1).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn width_examples() {
        let td = TreeDecomposition::new(3, vec![vec![0, 1, 2]], vec![]);
        assert_eq!(td.width(), 2);
        let td = TreeDecomposition::new(
            7,
            vec![vec![0], vec![1, 2, 3, 4], vec![5, 6]],
            vec![(0, 1), (1, 2)],
        );
        assert_eq!(td.width(), 3);
        let td = TreeDecomposition::new(2, vec![vec![0], vec![1]], vec![(0, 1)]);
        assert_eq!(td.width(), 0);
        assert_eq!(TreeDecomposition::new(0, vec![], vec![]).width(), -1);
    }

    #[test]
    fn single_bag_on_edge_is_valid() {
        let g = Graph::path(2);
        let td = TreeDecomposition::new(2, vec![vec![0, 1]], vec![]);
        assert!(validate_td(&g, &td).is_valid());
    }

    #[test]
    fn disconnected_forest_is_not_a_tree() {
        let g = Graph::path(2);
        let td = TreeDecomposition::new(2, vec![vec![0, 1], vec![0, 1]], vec![]);
        let report = validate_td(&g, &td);
        assert!(matches!(report.violations[0], Violation::NotATree(_)));
    }

    #[test]
    fn uncovered_triangle_edge() {
        let g = Graph::complete(3);
        let td = TreeDecomposition::new(3, vec![vec![0, 1], vec![1, 2]], vec![(0, 1)]);
        let report = validate_td(&g, &td);
        assert_eq!(report.violations, vec![Violation::EdgeNotCovered(0, 2)]);
        assert_eq!(report.to_string(), "edge {0,2} uncovered");
    }

    #[test]
    fn disconnected_vertex_subtree() {
        let g = Graph::path(3);
        // vertex 0 sits in nodes 0 and 2, but node 1 between them lacks it
        let td = TreeDecomposition::new(
            3,
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
            vec![(0, 1), (1, 2)],
        );
        let report = validate_td(&g, &td);
        assert!(report
            .violations
            .contains(&Violation::VertexSubtreeDisconnected(0)));
    }

    #[test]
    fn missing_vertex_reported() {
        let g = Graph::empty(2);
        let td = TreeDecomposition::new(2, vec![vec![0]], vec![]);
        assert_eq!(
            validate_td(&g, &td).violations,
            vec![Violation::VertexNotCovered(1)]
        );
    }

    #[test]
    fn heuristic_widths() {
        for h in [
            EliminationHeuristic::MinDegree,
            EliminationHeuristic::MinFill,
        ] {
            let p4 = Graph::path(4);
            let td = decompose(&p4, h);
            assert!(validate_td(&p4, &td).is_valid());
            assert_eq!(td.width(), 1);

            let c5 = Graph::cycle(5);
            let td = decompose(&c5, h);
            assert!(validate_td(&c5, &td).is_valid());
            assert_eq!(td.width(), 2);

            let k4 = Graph::complete(4);
            assert_eq!(decompose(&k4, h).width(), 3);
        }
    }

    #[test]
    fn disconnected_graph_still_yields_one_tree() {
        let g = Graph::from_edges(6, [(0, 1), (2, 3), (4, 5)]).unwrap();
        let td = decompose(&g, EliminationHeuristic::MinFill);
        assert!(validate_td(&g, &td).is_valid());
        assert_eq!(td.tree_edges().len(), td.node_count() - 1);
    }

    #[test]
    fn incremental_scores_match_recount() {
        let g = crate::generate::random_gnp(25, 0.3, 5);
        let mut elim = Eliminator::new(&g, EliminationHeuristic::MinFill);
        while !elim.queue.is_empty() {
            for &(s, v) in &elim.queue {
                assert_eq!(s, elim.fill_of(v), "stale fill score for {v}");
            }
            elim.pop();
        }
        let mut elim = Eliminator::new(&g, EliminationHeuristic::MinDegree);
        while !elim.queue.is_empty() {
            for &(s, v) in &elim.queue {
                assert_eq!(s, elim.adj[v].len(), "stale degree for {v}");
            }
            elim.pop();
        }
    }

    #[test]
    fn parse_single_bag() {
        let td = parse_td("s td 1 2 2\nb 1 1 2\n").unwrap();
        assert_eq!(td.bags(), &[vec![0, 1]]);
        assert_eq!(td.width(), 1);
    }

    #[test]
    fn parse_two_bags() {
        let td = parse_td("s td 2 1 2\nb 1 1\nb 2 2\n1 2\n").unwrap();
        assert_eq!(td.node_count(), 2);
        assert_eq!(td.width(), 0);
        assert_eq!(td.tree_edges(), &[(0, 1)]);
    }

    #[test]
    fn canonical_text_round_trips() {
        for text in [
            "s td 1 2 2\nb 1 1 2\n",
            "s td 2 1 2\nb 1 1\nb 2 2\n1 2\n",
            "s td 3 3 4\nb 1 1 2 3\nb 2 3 4\nb 3\n1 2\n2 3\n",
        ] {
            assert_eq!(write_td(&parse_td(text).unwrap()), text);
        }
    }

    #[test]
    fn parse_errors() {
        assert!(parse_td("s td 1 2 2\nb 2 1 2\n")
            .unwrap_err()
            .message
            .contains("out of range"));
        assert!(parse_td("s td 2 2 2\nb 1 1 2\n")
            .unwrap_err()
            .message
            .contains("never defined"));
        assert!(parse_td("s td 1 3 2\nb 1 1 2\n")
            .unwrap_err()
            .message
            .contains("bag size"));
        assert!(parse_td("s td 1 2 2\nb 1 1 3\n").is_err());
        assert!(parse_td("b 1 1 2\n").is_err());
    }

    #[test]
    fn trivial_decomposition_is_valid() {
        let g = crate::generate::random_gnp(9, 0.5, 1);
        let td = TreeDecomposition::trivial(&g);
        assert!(validate_td(&g, &td).is_valid());
        assert_eq!(td.width(), 8);
    }
}
