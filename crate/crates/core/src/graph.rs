//! Simple undirected graphs and the two text formats used for instances.
//!
//! Vertices are `0..n` internally. Both file formats use 1-based ids.

use std::fmt::Write as _;

use thiserror::Error;

pub type Vertex = usize;

/// Immutable simple undirected graph with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<Vertex>>,
    edge_count: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
}

impl Graph {
    /// Graph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Builds a graph from 0-based edge pairs. Duplicate edges collapse.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut twice = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            twice += list.len();
        }
        Ok(Graph {
            adjacency,
            edge_count: twice / 2,
        })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Self::from_edges(n, edges).expect("complete graph edges are valid")
    }

    pub fn path(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|v| (v - 1, v))).expect("path edges are valid")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a simple cycle needs at least 3 vertices");
        Self::from_edges(n, (0..n).map(|v| (v, (v + 1) % n))).expect("cycle edges are valid")
    }

    /// Star with center 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Self {
        Self::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("star edges are valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.adjacency.len() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn vertices(&self) -> std::ops::Range<Vertex> {
        0..self.adjacency.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    /// `p tw n m` header followed by `m` edge lines.
    PaceGr,
    /// One `u v` pair per line; `n` is the largest id seen.
    EdgeList,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

fn parse_id(token: &str, line: usize) -> Result<usize, ParseError> {
    token
        .parse::<usize>()
        .map_err(|_| ParseError::new(line, format!("expected a vertex id, found {token:?}")))
}

fn parse_edge_line(tokens: &[&str], line: usize) -> Result<(usize, usize), ParseError> {
    if tokens.len() != 2 {
        return Err(ParseError::new(line, "expected an edge `u v`"));
    }
    Ok((parse_id(tokens[0], line)?, parse_id(tokens[1], line)?))
}

pub fn parse_graph(text: &str, format: GraphFormat) -> Result<Graph, ParseError> {
    match format {
        GraphFormat::PaceGr => parse_pace_gr(text),
        GraphFormat::EdgeList => parse_edge_list(text),
    }
}

fn parse_pace_gr(text: &str) -> Result<Graph, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.is_empty() || tokens[0] == "c" {
            continue;
        }
        let Some((n, _)) = header else {
            if tokens.len() != 4 || tokens[0] != "p" || tokens[1] != "tw" {
                return Err(ParseError::new(
                    line,
                    "malformed header, expected `p tw n m`",
                ));
            }
            let n = tokens[2]
                .parse()
                .map_err(|_| ParseError::new(line, "malformed vertex count in header"))?;
            let m = tokens[3]
                .parse()
                .map_err(|_| ParseError::new(line, "malformed edge count in header"))?;
            header = Some((n, m));
            continue;
        };
        let (u, v) = parse_edge_line(&tokens, line)?;
        for x in [u, v] {
            if x == 0 || x > n {
                return Err(ParseError::new(
                    line,
                    format!("vertex id {x} out of range 1..={n}"),
                ));
            }
        }
        if u == v {
            return Err(ParseError::new(line, format!("self-loop at line {line}")));
        }
        edges.push((u - 1, v - 1));
    }
    let Some((n, m)) = header else {
        return Err(ParseError::new(
            last_line.max(1),
            "missing `p tw n m` header",
        ));
    };
    if edges.len() != m {
        return Err(ParseError::new(
            last_line.max(1),
            format!("header declares {m} edges but {} were found", edges.len()),
        ));
    }
    Ok(Graph::from_edges(n, edges).expect("edges were range- and loop-checked"))
}

fn parse_edge_list(text: &str) -> Result<Graph, ParseError> {
    let mut edges = Vec::new();
    let mut n = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.is_empty() || tokens[0] == "c" || tokens[0].starts_with('#') {
            continue;
        }
        let (u, v) = parse_edge_line(&tokens, line)?;
        if u == 0 || v == 0 {
            return Err(ParseError::new(line, "vertex ids are 1-based"));
        }
        if u == v {
            return Err(ParseError::new(line, format!("self-loop at line {line}")));
        }
        n = n.max(u).max(v);
        edges.push((u - 1, v - 1));
    }
    Ok(Graph::from_edges(n, edges).expect("edges were range- and loop-checked"))
}

/// Serializes in `pace-gr` format with edges in lexicographic order.
pub fn write_pace_gr(graph: &Graph) -> String {
    let mut out = format!("p tw {} {}\n", graph.vertex_count(), graph.edge_count());
    for (u, v) in graph.edges() {
        writeln!(out, "{} {}", u + 1, v + 1).unwrap();
    }
    out
}
