//! Rooted nice tree decompositions: every node is a leaf, an introduce, a
//! forget or a join node. Leaves and the root carry empty bags.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Graph, Vertex};
use crate::treedec::{validate_td, TreeDecomposition, ValidationReport, Violation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Leaf,
    Introduce(Vertex),
    Forget(Vertex),
    Join,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiceNode {
    /// Sorted bag.
    pub bag: Vec<Vertex>,
    pub kind: NodeKind,
    pub children: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiceDecomposition {
    nodes: Vec<NiceNode>,
    root: usize,
}

#[derive(Debug, Error)]
pub enum NiceError {
    #[error("cannot build a nice decomposition of the empty graph")]
    EmptyGraph,
    #[error("input decomposition is invalid:\n{0}")]
    InvalidInput(ValidationReport),
}

impl NiceDecomposition {
    /// Wraps raw nodes without checking them; see [`validate_nice`].
    pub fn from_parts(nodes: Vec<NiceNode>, root: usize) -> Self {
        NiceDecomposition { nodes, root }
    }

    pub fn nodes(&self) -> &[NiceNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &NiceNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn width(&self) -> isize {
        self.nodes
            .iter()
            .map(|n| n.bag.len() as isize)
            .max()
            .unwrap_or(0)
            - 1
    }

    /// Node ids with every child listed before its parent; the root comes last.
    pub fn postorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                order.push(id);
                continue;
            }
            stack.push((id, true));
            for &c in self.nodes[id].children.iter().rev() {
                stack.push((c, false));
            }
        }
        order
    }

    /// Parent of every node; `None` for the root.
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            for &c in &node.children {
                parent[c] = Some(id);
            }
        }
        parent
    }

    pub fn count_kind(&self, pred: impl Fn(&NodeKind) -> bool) -> usize {
        self.nodes.iter().filter(|n| pred(&n.kind)).count()
    }

    /// Debug listing, one node per line: `id kind vertex children bag`.
    /// Node ids are 0-based, vertex ids 1-based, `-` marks an absent field.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (id, node) in self.nodes.iter().enumerate() {
            let (kind, vertex) = match node.kind {
                NodeKind::Leaf => ("leaf", None),
                NodeKind::Introduce(x) => ("introduce", Some(x)),
                NodeKind::Forget(x) => ("forget", Some(x)),
                NodeKind::Join => ("join", None),
            };
            let vertex = vertex.map_or("-".to_string(), |x| (x + 1).to_string());
            let children = if node.children.is_empty() {
                "-".to_string()
            } else {
                node.children
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            };
            write!(out, "{id} {kind} {vertex} {children}").unwrap();
            for &v in &node.bag {
                write!(out, " {}", v + 1).unwrap();
            }
            out.push('\n');
        }
        out
    }

    fn push(&mut self, bag: Vec<Vertex>, kind: NodeKind, children: Vec<usize>) -> usize {
        self.nodes.push(NiceNode {
            bag,
            kind,
            children,
        });
        self.nodes.len() - 1
    }

    fn introduce(&mut self, below: usize, x: Vertex) -> usize {
        let mut bag = self.nodes[below].bag.clone();
        let at = bag
            .binary_search(&x)
            .expect_err("introduced vertex already in bag");
        bag.insert(at, x);
        self.push(bag, NodeKind::Introduce(x), vec![below])
    }

    fn forget(&mut self, below: usize, x: Vertex) -> usize {
        let mut bag = self.nodes[below].bag.clone();
        let at = bag
            .binary_search(&x)
            .expect("forgotten vertex missing from bag");
        bag.remove(at);
        self.push(bag, NodeKind::Forget(x), vec![below])
    }

    /// Forgets `from \ to`, then introduces `to \ from`, both in ascending order.
    fn transition(&mut self, mut top: usize, to: &[Vertex]) -> usize {
        let from = self.nodes[top].bag.clone();
        for &x in from.iter().filter(|x| to.binary_search(x).is_err()) {
            top = self.forget(top, x);
        }
        for &x in to.iter().filter(|x| from.binary_search(x).is_err()) {
            top = self.introduce(top, x);
        }
        top
    }
}

/// Converts a valid tree decomposition into a nice one rooted at the input's
/// last node. Width is preserved.
pub fn make_nice(td: &TreeDecomposition, graph: &Graph) -> Result<NiceDecomposition, NiceError> {
    if graph.vertex_count() == 0 {
        return Err(NiceError::EmptyGraph);
    }
    let report = validate_td(graph, td);
    if !report.is_valid() {
        return Err(NiceError::InvalidInput(report));
    }
    let count = td.node_count();
    let adj = td.tree_adjacency();
    let root = count - 1;

    // BFS from the root gives parents before children
    let mut order = Vec::with_capacity(count);
    let mut parent = vec![usize::MAX; count];
    let mut seen = vec![false; count];
    seen[root] = true;
    order.push(root);
    let mut head = 0;
    while head < order.len() {
        let t = order[head];
        head += 1;
        for &c in &adj[t] {
            if !seen[c] {
                seen[c] = true;
                parent[c] = t;
                order.push(c);
            }
        }
    }
    let mut children = vec![Vec::new(); count];
    for &t in &order[1..] {
        children[parent[t]].push(t);
    }

    let mut nd = NiceDecomposition {
        nodes: Vec::new(),
        root: 0,
    };
    let mut top = vec![usize::MAX; count];
    for &t in order.iter().rev() {
        let bag = td.bag(t);
        let mut branches = Vec::with_capacity(children[t].len().max(1));
        if children[t].is_empty() {
            let leaf = nd.push(Vec::new(), NodeKind::Leaf, Vec::new());
            branches.push(nd.transition(leaf, bag));
        }
        for &c in &children[t] {
            branches.push(nd.transition(top[c], bag));
        }
        let mut acc = branches[0];
        for &b in &branches[1..] {
            acc = nd.push(bag.to_vec(), NodeKind::Join, vec![acc, b]);
        }
        top[t] = acc;
    }
    nd.root = nd.transition(top[root], &[]);
    Ok(nd)
}

/// Checks every nice-node clause, the empty leaf/root convention, and the
/// tree-decomposition conditions of the underlying bags.
pub fn validate_nice(nd: &NiceDecomposition, graph: &Graph) -> ValidationReport {
    let mut report = ValidationReport::default();
    let len = nd.len();
    if len == 0 || nd.root() >= len {
        report.push(Violation::NotATree("missing root".into()));
        return report;
    }
    let mut parent_count = vec![0usize; len];
    let mut structure_ok = true;
    for (id, node) in nd.nodes().iter().enumerate() {
        if node.children.len() > 2 {
            report.push(Violation::TooManyChildren {
                node: id,
                children: node.children.len(),
            });
        }
        for &c in &node.children {
            if c >= len {
                report.push(Violation::NotATree(format!(
                    "node {id} has missing child {c}"
                )));
                structure_ok = false;
            } else {
                parent_count[c] += 1;
            }
        }
        if node.bag.windows(2).any(|w| w[0] >= w[1]) {
            report.push(Violation::NotATree(format!(
                "bag of node {id} is not sorted"
            )));
        }
    }
    if !structure_ok {
        return report;
    }
    if parent_count[nd.root()] != 0 {
        report.push(Violation::NotATree("root has a parent".into()));
        structure_ok = false;
    }
    for (id, &pc) in parent_count.iter().enumerate() {
        if id != nd.root() && pc != 1 {
            report.push(Violation::NotATree(format!("node {id} has {pc} parents")));
            structure_ok = false;
        }
    }
    if structure_ok && nd.postorder().len() != len {
        report.push(Violation::NotATree(
            "some nodes are unreachable from the root".into(),
        ));
        structure_ok = false;
    }

    for (id, node) in nd.nodes().iter().enumerate() {
        let child_bag = |i: usize| &nd.node(node.children[i]).bag;
        match node.kind {
            NodeKind::Leaf => {
                if !node.children.is_empty() {
                    report.push(Violation::KindMismatch(id));
                } else if !node.bag.is_empty() {
                    report.push(Violation::LeafNotEmpty(id));
                }
            }
            NodeKind::Introduce(x) => {
                if node.children.len() != 1 {
                    report.push(Violation::KindMismatch(id));
                    continue;
                }
                let below = child_bag(0);
                let mut expect = below.clone();
                let ok = match expect.binary_search(&x) {
                    Ok(_) => false,
                    Err(at) => {
                        expect.insert(at, x);
                        expect == node.bag
                    }
                };
                if !ok {
                    report.push(Violation::IntroduceMismatch(id));
                }
            }
            NodeKind::Forget(x) => {
                if node.children.len() != 1 {
                    report.push(Violation::KindMismatch(id));
                    continue;
                }
                let mut expect = child_bag(0).clone();
                let ok = match expect.binary_search(&x) {
                    Ok(at) => {
                        expect.remove(at);
                        expect == node.bag
                    }
                    Err(_) => false,
                };
                if !ok {
                    report.push(Violation::ForgetMismatch(id));
                }
            }
            NodeKind::Join => {
                if node.children.len() != 2 {
                    report.push(Violation::KindMismatch(id));
                    continue;
                }
                if *child_bag(0) != node.bag || *child_bag(1) != node.bag {
                    report.push(Violation::JoinBagsUnequal(id));
                }
            }
        }
    }
    if !nd.node(nd.root()).bag.is_empty() {
        report.push(Violation::RootNotEmpty);
    }

    if structure_ok {
        let bags = nd.nodes().iter().map(|n| n.bag.clone()).collect();
        let edges = nd
            .nodes()
            .iter()
            .enumerate()
            .flat_map(|(id, n)| n.children.iter().map(move |&c| (id, c)))
            .collect();
        let td = TreeDecomposition::new(graph.vertex_count(), bags, edges);
        report.violations.extend(validate_td(graph, &td).violations);
    }
    report
}

/// Like [`validate_nice`] but tolerating nonempty leaves and root, which the
/// dynamic programs handle through their general leaf and root rules.
pub fn validate_structure(nd: &NiceDecomposition, graph: &Graph) -> ValidationReport {
    let mut report = validate_nice(nd, graph);
    report
        .violations
        .retain(|v| !matches!(v, Violation::LeafNotEmpty(_) | Violation::RootNotEmpty));
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treedec::{decompose, EliminationHeuristic};

    #[test]
    fn single_bag_becomes_a_chain() {
        let g = Graph::path(2);
        let td = TreeDecomposition::new(2, vec![vec![0, 1]], vec![]);
        let nd = make_nice(&td, &g).unwrap();
        let kinds: Vec<NodeKind> = nd.postorder().iter().map(|&i| nd.node(i).kind).collect();
        assert_eq!(
            kinds,
            vec![
                NodeKind::Leaf,
                NodeKind::Introduce(0),
                NodeKind::Introduce(1),
                NodeKind::Forget(0),
                NodeKind::Forget(1)
            ]
        );
        assert!(validate_nice(&nd, &g).is_valid());
    }

    #[test]
    fn branching_bags_produce_a_join() {
        let g = Graph::path(3);
        // center bag {0,1} with two neighbors {0,1} and {1,2}
        let td = TreeDecomposition::new(
            3,
            vec![vec![0, 1], vec![1, 2], vec![0, 1]],
            vec![(0, 2), (1, 2)],
        );
        let nd = make_nice(&td, &g).unwrap();
        assert!(validate_nice(&nd, &g).is_valid());
        let joins: Vec<&NiceNode> = nd
            .nodes()
            .iter()
            .filter(|n| n.kind == NodeKind::Join)
            .collect();
        assert_eq!(joins.len(), 1);
        assert_eq!(joins[0].bag, vec![0, 1]);
        for &c in &joins[0].children {
            assert_eq!(nd.node(c).bag, vec![0, 1]);
        }
    }

    #[test]
    fn preserves_width_on_cycle() {
        let g = Graph::cycle(5);
        let td = decompose(&g, EliminationHeuristic::MinFill);
        let nd = make_nice(&td, &g).unwrap();
        assert!(validate_nice(&nd, &g).is_valid());
        assert_eq!(nd.width(), td.width());
    }

    #[test]
    fn rejects_invalid_input() {
        let g = Graph::complete(3);
        let td = TreeDecomposition::new(3, vec![vec![0, 1], vec![1, 2]], vec![(0, 1)]);
        assert!(matches!(
            make_nice(&td, &g),
            Err(NiceError::InvalidInput(_))
        ));
        assert!(matches!(
            make_nice(&TreeDecomposition::new(0, vec![], vec![]), &Graph::empty(0)),
            Err(NiceError::EmptyGraph)
        ));
    }

    #[test]
    fn detects_unequal_join_bags() {
        let g = Graph::empty(1);
        let nodes = vec![
            NiceNode {
                bag: vec![],
                kind: NodeKind::Leaf,
                children: vec![],
            },
            NiceNode {
                bag: vec![0],
                kind: NodeKind::Introduce(0),
                children: vec![0],
            },
            NiceNode {
                bag: vec![],
                kind: NodeKind::Leaf,
                children: vec![],
            },
            NiceNode {
                bag: vec![0],
                kind: NodeKind::Join,
                children: vec![1, 2],
            },
            NiceNode {
                bag: vec![],
                kind: NodeKind::Forget(0),
                children: vec![3],
            },
        ];
        let report = validate_nice(&NiceDecomposition::from_parts(nodes, 4), &g);
        assert!(
            report.violations.contains(&Violation::JoinBagsUnequal(3)),
            "{report}"
        );
    }

    #[test]
    fn detects_nonempty_leaf() {
        let g = Graph::empty(1);
        let nodes = vec![
            NiceNode {
                bag: vec![0],
                kind: NodeKind::Leaf,
                children: vec![],
            },
            NiceNode {
                bag: vec![],
                kind: NodeKind::Forget(0),
                children: vec![0],
            },
        ];
        let nd = NiceDecomposition::from_parts(nodes, 1);
        assert_eq!(
            validate_nice(&nd, &g).violations,
            vec![Violation::LeafNotEmpty(0)]
        );
        assert!(validate_structure(&nd, &g).is_valid());
    }

    #[test]
    fn dump_is_stable() {
        let g = Graph::path(2);
        let td = TreeDecomposition::new(2, vec![vec![0, 1]], vec![]);
        let nd = make_nice(&td, &g).unwrap();
        assert_eq!(
            nd.dump(),
            "0 leaf - -\n1 introduce 1 0 1\n2 introduce 2 1 1 2\n3 forget 1 2 2\n4 forget 2 3\n"
        );
    }
}
