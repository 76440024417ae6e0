//! Helpers shared by the integration suites: seeded instance families and
//! independent three-state reference DPs for the w = 1 cases.
#![allow(dead_code)]

use std::collections::HashMap;

use wdom::generate::{random_gnp, random_partial_ktree, shuffle_labels};
use wdom::{decompose, make_nice, EliminationHeuristic, Graph, NiceDecomposition, NodeKind};

pub struct Instance {
    pub graph: Graph,
    pub w: usize,
    pub label: String,
}

pub fn nice_of(graph: &Graph) -> NiceDecomposition {
    make_nice(&decompose(graph, EliminationHeuristic::MinFill), graph)
        .expect("heuristic decompositions are valid")
}

/// Largest coloring count `(w + 2)^{width + 1}` accepted for a literal
/// G(n, p) instance; denser draws are replaced by partial k-trees.
pub const GNP_CELL_CAP: usize = 100_000;

/// A seeded graph on `n` vertices: G(n, p) when its min-fill decomposition
/// keeps tables under [`GNP_CELL_CAP`], otherwise a relabeled random
/// partial k-tree (k ≤ 4) whose edges survive with probability `density`.
pub fn small_graph(n: usize, density: f64, w: usize, k: usize, seed: u64) -> (Graph, String) {
    capped_graph(n, density, w, k, seed, GNP_CELL_CAP)
}

pub fn capped_graph(
    n: usize,
    density: f64,
    w: usize,
    k: usize,
    seed: u64,
    cap: usize,
) -> (Graph, String) {
    let g = random_gnp(n, density, seed);
    let width = decompose(&g, EliminationHeuristic::MinFill).width().max(0) as u32;
    if (w + 2)
        .checked_pow(width + 1)
        .is_some_and(|cells| cells <= cap)
    {
        return (g, format!("gnp(n={n}, p={density:.1}, seed={seed})"));
    }
    let k = k.clamp(1, n - 1);
    let g = random_partial_ktree(n, k, density, seed).expect("valid parameters");
    (
        shuffle_labels(&g, seed ^ 0x5eed),
        format!("partial {k}-tree(n={n}, keep={density:.1}, seed={seed})"),
    )
}

/// `count` instances with n in `lo..=hi`, densities 0.1..0.9 and w in 1..=3.
pub fn instances(count: usize, lo: usize, hi: usize, salt: u64) -> Vec<Instance> {
    (0..count)
        .map(|i| {
            let n = lo + (i * 7) % (hi - lo + 1);
            let density = 0.1 * (1 + i % 9) as f64;
            let w = 1 + i % 3;
            let k = 2 + (i / 3) % 3;
            let (graph, label) = small_graph(n, density, w, k, salt + i as u64);
            Instance {
                graph,
                w,
                label: format!("{label}, w={w}"),
            }
        })
        .collect()
}

/// Same family with w fixed to 1 and bags of at most seven vertices, which
/// keeps the hash-map reference DPs quick.
pub fn instances_w1(count: usize, lo: usize, hi: usize, salt: u64) -> Vec<Instance> {
    (0..count)
        .map(|i| {
            let n = lo + (i * 7) % (hi - lo + 1);
            let density = 0.1 * (1 + i % 9) as f64;
            let k = 1 + (i / 3) % 4;
            let (graph, label) = capped_graph(n, density, 1, k, salt + i as u64, 3usize.pow(7));
            Instance { graph, w: 1, label }
        })
        .collect()
}

const NOT: u8 = 0;
const DOM: u8 = 1;
const IN: u8 = 2;

fn states(len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                [NOT, DOM, IN].into_iter().map(move |c| {
                    let mut t = s.clone();
                    t.push(c);
                    t
                })
            })
            .collect();
    }
    out
}

/// Child states of an introduce node whose parent state selects the new
/// vertex: dominated neighbors may or may not have been dominated before.
fn undo_selection(graph: &Graph, bag: &[usize], pos: usize, parent: &[u8]) -> Option<Vec<Vec<u8>>> {
    let x = bag[pos];
    let mut options: Vec<Vec<u8>> = vec![vec![]];
    for (i, &v) in bag.iter().enumerate() {
        if i == pos {
            continue;
        }
        let choices: Vec<u8> = match (graph.has_edge(x, v), parent[i]) {
            (true, NOT) => return None,
            (true, DOM) => vec![DOM, NOT],
            (_, c) => vec![c],
        };
        options = options
            .into_iter()
            .flat_map(|o| {
                choices.iter().map(move |&c| {
                    let mut t = o.clone();
                    t.push(c);
                    t
                })
            })
            .collect();
    }
    Some(options)
}

fn without(state: &[u8], pos: usize) -> Vec<u8> {
    let mut s = state.to_vec();
    s.remove(pos);
    s
}

fn with(state: &[u8], pos: usize, c: u8) -> Vec<u8> {
    let mut s = state.to_vec();
    s.insert(pos, c);
    s
}

fn has_selected_neighbor(graph: &Graph, bag: &[usize], pos: usize, state: &[u8]) -> bool {
    bag.iter()
        .enumerate()
        .any(|(i, &v)| i != pos && state[i] == IN && graph.has_edge(bag[pos], v))
}

fn join_children(state: &[u8]) -> Vec<(Vec<u8>, Vec<u8>)> {
    let mut out = vec![(vec![], vec![])];
    for &c in state {
        let pairs: &[(u8, u8)] = match c {
            IN => &[(IN, IN)],
            NOT => &[(NOT, NOT)],
            _ => &[(DOM, DOM), (DOM, NOT), (NOT, DOM)],
        };
        out = out
            .into_iter()
            .flat_map(|(l, r)| {
                pairs.iter().map(move |&(a, b)| {
                    let (mut l, mut r) = (l.clone(), r.clone());
                    l.push(a);
                    r.push(b);
                    (l, r)
                })
            })
            .collect();
    }
    out
}

/// Classic dominating-set DP with exact states (undominated / dominated /
/// selected). Returns the domination number.
pub fn reference_domination(graph: &Graph, nd: &NiceDecomposition) -> usize {
    let mut tables: Vec<HashMap<Vec<u8>, usize>> = vec![HashMap::new(); nd.len()];
    for id in nd.postorder() {
        let node = nd.node(id);
        let bag = &node.bag;
        let mut table = HashMap::new();
        match node.kind {
            NodeKind::Leaf => {
                assert!(bag.is_empty());
                table.insert(vec![], 0);
            }
            NodeKind::Introduce(x) => {
                let child = &tables[node.children[0]];
                let pos = bag.iter().position(|&v| v == x).unwrap();
                for s in states(bag.len()) {
                    let value = match s[pos] {
                        IN => undo_selection(graph, bag, pos, &s).and_then(|opts| {
                            opts.iter()
                                .filter_map(|o| child.get(o))
                                .min()
                                .map(|v| v + 1)
                        }),
                        DOM if has_selected_neighbor(graph, bag, pos, &s) => {
                            child.get(&without(&s, pos)).copied()
                        }
                        NOT if !has_selected_neighbor(graph, bag, pos, &s) => {
                            child.get(&without(&s, pos)).copied()
                        }
                        _ => None,
                    };
                    if let Some(v) = value {
                        table.insert(s, v);
                    }
                }
            }
            NodeKind::Forget(x) => {
                let child = &tables[node.children[0]];
                let pos = nd
                    .node(node.children[0])
                    .bag
                    .iter()
                    .position(|&v| v == x)
                    .unwrap();
                for s in states(bag.len()) {
                    let best = [IN, DOM]
                        .iter()
                        .filter_map(|&c| child.get(&with(&s, pos, c)))
                        .min();
                    if let Some(&v) = best {
                        table.insert(s, v);
                    }
                }
            }
            NodeKind::Join => {
                let (l, r) = (&tables[node.children[0]], &tables[node.children[1]]);
                for s in states(bag.len()) {
                    let chosen = s.iter().filter(|&&c| c == IN).count();
                    let best = join_children(&s)
                        .iter()
                        .filter_map(|(a, b)| Some(l.get(a)? + r.get(b)? - chosen))
                        .min();
                    if let Some(v) = best {
                        table.insert(s, v);
                    }
                }
            }
        }
        for &c in &node.children {
            tables[c].clear();
        }
        tables[id] = table;
    }
    tables[nd.root()][&vec![]]
}

/// Budgeted variant: the largest number of vertices that are selected or
/// have a selected neighbor, over sets of at most `z` vertices, for every
/// `z` up to `budget`.
pub fn reference_coverage(graph: &Graph, nd: &NiceDecomposition, budget: usize) -> Vec<usize> {
    type Row = Vec<Option<usize>>;
    let mut tables: Vec<HashMap<Vec<u8>, Row>> = vec![HashMap::new(); nd.len()];
    let lift = |a: Option<usize>, b: Option<usize>| match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    };
    for id in nd.postorder() {
        let node = nd.node(id);
        let bag = &node.bag;
        let mut table: HashMap<Vec<u8>, Row> = HashMap::new();
        match node.kind {
            NodeKind::Leaf => {
                table.insert(vec![], vec![Some(0); budget + 1]);
            }
            NodeKind::Introduce(x) => {
                let child = &tables[node.children[0]];
                let pos = bag.iter().position(|&v| v == x).unwrap();
                for s in states(bag.len()) {
                    let mut row = vec![None; budget + 1];
                    match s[pos] {
                        IN => {
                            for o in undo_selection(graph, bag, pos, &s).unwrap_or_default() {
                                if let Some(c) = child.get(&o) {
                                    for z in 1..=budget {
                                        row[z] = lift(row[z], c[z - 1]);
                                    }
                                }
                            }
                        }
                        DOM | NOT
                            if (s[pos] == DOM) == has_selected_neighbor(graph, bag, pos, &s) =>
                        {
                            if let Some(c) = child.get(&without(&s, pos)) {
                                row = c.clone();
                            }
                        }
                        _ => {}
                    }
                    table.insert(s, row);
                }
            }
            NodeKind::Forget(x) => {
                let child = &tables[node.children[0]];
                let pos = nd
                    .node(node.children[0])
                    .bag
                    .iter()
                    .position(|&v| v == x)
                    .unwrap();
                for s in states(bag.len()) {
                    let mut row = vec![None; budget + 1];
                    for (c, gain) in [(IN, 1), (DOM, 1), (NOT, 0)] {
                        if let Some(src) = child.get(&with(&s, pos, c)) {
                            for z in 0..=budget {
                                row[z] = lift(row[z], src[z].map(|v| v + gain));
                            }
                        }
                    }
                    table.insert(s, row);
                }
            }
            NodeKind::Join => {
                let (l, r) = (&tables[node.children[0]], &tables[node.children[1]]);
                for s in states(bag.len()) {
                    let chosen = s.iter().filter(|&&c| c == IN).count();
                    let mut row = vec![None; budget + 1];
                    for (a, b) in join_children(&s) {
                        let (Some(la), Some(rb)) = (l.get(&a), r.get(&b)) else {
                            continue;
                        };
                        for z in 0..=budget {
                            for z1 in 0..=budget {
                                let Some(z2) =
                                    (z + chosen).checked_sub(z1).filter(|&z2| z2 <= budget)
                                else {
                                    continue;
                                };
                                if let (Some(x), Some(y)) = (la[z1], rb[z2]) {
                                    row[z] = lift(row[z], Some(x + y));
                                }
                            }
                        }
                    }
                    table.insert(s, row);
                }
            }
        }
        for &c in &node.children {
            tables[c].clear();
        }
        tables[id] = table;
    }
    tables[nd.root()][&vec![]]
        .iter()
        .map(|v| v.expect("the empty set is feasible"))
        .collect()
}
