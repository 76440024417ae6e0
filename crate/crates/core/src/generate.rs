//! Seeded instance generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, Vertex};
use crate::treedec::TreeDecomposition;

#[derive(Debug, Error, PartialEq)]
pub enum GenerateError {
    #[error("k-tree needs k < n (got n = {n}, k = {k})")]
    TooFewVertices { n: usize, k: usize },
    #[error("k must be positive")]
    ZeroK,
    #[error("keep probability {0} is outside [0, 1]")]
    BadProbability(f64),
}

/// A random partial k-tree together with the decomposition its construction induces.
#[derive(Clone, Debug)]
pub struct PartialKTree {
    pub graph: Graph,
    /// One bag per construction step; width is at most `k`.
    pub decomposition: TreeDecomposition,
}

/// Builds a k-tree by repeatedly attaching a new vertex to a uniformly chosen
/// k-clique, then keeps each edge independently with probability `keep_prob`.
pub fn partial_ktree(
    n: usize,
    k: usize,
    keep_prob: f64,
    seed: u64,
) -> Result<PartialKTree, GenerateError> {
    if k == 0 {
        return Err(GenerateError::ZeroK);
    }
    if k >= n {
        return Err(GenerateError::TooFewVertices { n, k });
    }
    if !(0.0..=1.0).contains(&keep_prob) {
        return Err(GenerateError::BadProbability(keep_prob));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let base: Vec<Vertex> = (0..=k).collect();
    let mut edges: Vec<(Vertex, Vertex)> = Vec::new();
    for u in 0..=k {
        for v in u + 1..=k {
            edges.push((u, v));
        }
    }
    let mut bags = vec![base.clone()];
    let mut tree_edges = Vec::new();
    // every k-clique seen so far, with a bag that contains it
    let mut cliques: Vec<(Vec<Vertex>, usize)> = (0..=k)
        .map(|skip| (base.iter().copied().filter(|&x| x != skip).collect(), 0))
        .collect();

    for v in k + 1..n {
        let (clique, host) = cliques[rng.gen_range(0..cliques.len())].clone();
        let bag_id = bags.len();
        for &u in &clique {
            edges.push((u, v));
        }
        let mut bag = clique.clone();
        bag.push(v);
        bags.push(bag);
        tree_edges.push((host, bag_id));
        for skip in 0..k {
            let mut next: Vec<Vertex> = clique
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &x)| x)
                .collect();
            next.push(v);
            cliques.push((next, bag_id));
        }
    }

    let kept = edges.into_iter().filter(|_| rng.gen_bool(keep_prob));
    let graph = Graph::from_edges(n, kept).expect("generated edges are simple");
    let decomposition = TreeDecomposition::new(n, bags, tree_edges);
    Ok(PartialKTree {
        graph,
        decomposition,
    })
}

pub fn random_partial_ktree(
    n: usize,
    k: usize,
    keep_prob: f64,
    seed: u64,
) -> Result<Graph, GenerateError> {
    partial_ktree(n, k, keep_prob, seed).map(|p| p.graph)
}

/// Erdős–Rényi graph G(n, p) with a deterministic seed.
pub fn random_gnp(n: usize, density: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density.clamp(0.0, 1.0)) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).expect("generated edges are simple")
}

/// Relabels vertices by a seeded random permutation.
pub fn shuffle_labels(graph: &Graph, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<Vertex> = graph.vertices().collect();
    perm.shuffle(&mut rng);
    Graph::from_edges(
        graph.vertex_count(),
        graph.edges().map(|(u, v)| (perm[u], perm[v])),
    )
    .expect("relabelled edges are simple")
}
