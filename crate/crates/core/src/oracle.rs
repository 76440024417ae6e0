//! Brute-force reference solvers. Slow on purpose: they enumerate subsets.

use thiserror::Error;

use crate::graph::{Graph, Vertex};

pub const MAX_WDOM_ORACLE: usize = 20;
pub const MAX_LMAX_ORACLE: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("graph has {n} vertices; the oracle handles at most {limit}")]
    TooLarge { n: usize, limit: usize },
}

fn check_set(graph: &Graph, set: &[Vertex]) -> Result<(), OracleError> {
    let n = graph.vertex_count();
    match set.iter().find(|&&v| v >= n) {
        Some(&vertex) => Err(OracleError::VertexOutOfRange { vertex, n }),
        None => Ok(()),
    }
}

fn selected_neighbors(graph: &Graph, set: &[Vertex]) -> (Vec<bool>, Vec<usize>) {
    let mut inside = vec![false; graph.vertex_count()];
    for &v in set {
        inside[v] = true;
    }
    let counts = graph
        .vertices()
        .map(|v| graph.neighbors(v).iter().filter(|&&u| inside[u]).count())
        .collect();
    (inside, counts)
}

/// Whether every vertex outside `set` has at least `w` neighbors in it.
pub fn is_w_dominating(graph: &Graph, set: &[Vertex], w: usize) -> Result<bool, OracleError> {
    check_set(graph, set)?;
    let (inside, counts) = selected_neighbors(graph, set);
    Ok(graph.vertices().all(|v| inside[v] || counts[v] >= w))
}

/// `|S|` plus the number of vertices outside `S` with at least `w` neighbors in `S`.
pub fn lmax_value(graph: &Graph, set: &[Vertex], w: usize) -> Result<usize, OracleError> {
    check_set(graph, set)?;
    let (inside, counts) = selected_neighbors(graph, set);
    Ok(graph
        .vertices()
        .filter(|&v| inside[v] || counts[v] >= w)
        .count())
}

struct Masks {
    nbrs: Vec<u32>,
}

impl Masks {
    fn new(graph: &Graph) -> Self {
        let nbrs = graph
            .vertices()
            .map(|v| graph.neighbors(v).iter().fold(0u32, |m, &u| m | 1 << u))
            .collect();
        Masks { nbrs }
    }

    fn covered(&self, set: u32, w: usize) -> usize {
        self.nbrs
            .iter()
            .enumerate()
            .filter(|&(v, &nb)| set >> v & 1 == 1 || (nb & set).count_ones() as usize >= w)
            .count()
    }
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order until it returns `true`.
fn combinations(n: usize, k: usize, mut f: impl FnMut(u32, &[usize]) -> bool) -> bool {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let mask = idx.iter().fold(0u32, |m, &i| m | 1 << i);
        if f(mask, &idx) {
            return true;
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return false;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Minimum w-dominating set: the lexicographically first among the smallest.
pub fn brute_wdom(graph: &Graph, w: usize) -> Result<(usize, Vec<Vertex>), OracleError> {
    let n = graph.vertex_count();
    if n > MAX_WDOM_ORACLE {
        return Err(OracleError::TooLarge {
            n,
            limit: MAX_WDOM_ORACLE,
        });
    }
    let masks = Masks::new(graph);
    let mut best = Vec::new();
    for k in 0..=n {
        if combinations(n, k, |mask, idx| {
            let hit = masks.covered(mask, w) == n;
            if hit {
                best = idx.to_vec();
            }
            hit
        }) {
            return Ok((k, best));
        }
    }
    unreachable!("the whole vertex set always w-dominates")
}

/// Best L-Max objective over sets of at most `budget` vertices; ties go to
/// smaller, then lexicographically first sets.
pub fn brute_lmax(
    graph: &Graph,
    w: usize,
    budget: usize,
) -> Result<(usize, Vec<Vertex>), OracleError> {
    let n = graph.vertex_count();
    if n > MAX_LMAX_ORACLE {
        return Err(OracleError::TooLarge {
            n,
            limit: MAX_LMAX_ORACLE,
        });
    }
    let masks = Masks::new(graph);
    let mut best = (0, Vec::new());
    for k in 1..=budget.min(n) {
        combinations(n, k, |mask, idx| {
            let value = masks.covered(mask, w);
            if value > best.0 {
                best = (value, idx.to_vec());
            }
            false
        });
    }
    Ok(best)
}
