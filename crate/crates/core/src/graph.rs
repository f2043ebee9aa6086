//! Undirected topologies on which random walks and gossip run.
//!
//! Nodes are dense ids `0..n`. Adjacency lists are sorted, contain no
//! duplicates and no self-loops; every builder returns a connected graph or
//! an error.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use thiserror::Error;

use crate::rng::stream_rng;

/// Largest node count any builder will produce.
pub const MAX_NODES: usize = 1_000_000;

/// Rejection-sampling budget for connected geometric graphs.
pub const GEOMETRIC_ATTEMPTS: usize = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("invalid graph parameter: {0}")]
    InvalidParameter(String),
    #[error("graph would have {requested} nodes, limit is {limit}")]
    TooLarge { requested: u128, limit: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("no connected geometric graph after {attempts} attempts (n={n}, radius={radius})")]
    GeometricNotConnected {
        n: usize,
        radius: f64,
        attempts: usize,
    },
    #[error("edge ({0}, {1}) is invalid: {2}")]
    InvalidEdge(usize, usize, &'static str),
    #[error("edge list parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from an undirected edge list. Duplicate edges are
    /// merged; self-loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::InvalidParameter("n must be positive".into()));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::InvalidEdge(u, v, "endpoint out of range"));
            }
            if u == v {
                return Err(GraphError::InvalidEdge(u, v, "self-loop"));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        Self::from_adjacency(adj)
    }

    fn from_adjacency(mut adj: Vec<Vec<usize>>) -> Result<Self, GraphError> {
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        let degree_sum: usize = adj.iter().map(Vec::len).sum();
        let g = Graph {
            adj,
            edge_count: degree_sum / 2,
        };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect()
    }

    /// Common degree if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.degree(0);
        self.adj.iter().all(|l| l.len() == d).then_some(d)
    }

    /// BFS distances from `source`; `usize::MAX` marks unreachable nodes.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.node_count()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    fn is_connected(&self) -> bool {
        self.bfs_distances(0).iter().all(|&d| d != usize::MAX)
    }

    /// Longest shortest path, by one BFS per node.
    pub fn diameter(&self) -> usize {
        (0..self.node_count())
            .map(|s| self.bfs_distances(s).into_iter().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Edge-list text: a header line `n m`, then one `u v` line per edge
    /// with `u < v`.
    pub fn to_edge_list(&self) -> String {
        let edges = self.edges();
        let mut s = String::with_capacity(16 * (edges.len() + 1));
        let _ = writeln!(s, "{} {}", self.node_count(), edges.len());
        for (u, v) in edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let (n, m) = parse_pair(hline, header)?;
        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines {
            let (u, v) = parse_pair(line, l)?;
            if u >= v {
                return Err(GraphError::Parse {
                    line,
                    msg: format!("expected u < v, got {u} {v}"),
                });
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: hline,
                msg: format!("header announces {m} edges, found {}", edges.len()),
            });
        }
        Self::from_edges(n, &edges)
    }

    pub fn read_edge_list(path: &Path) -> Result<Self, GraphError> {
        let text = std::fs::read_to_string(path).map_err(|e| GraphError::Io(e.to_string()))?;
        Self::parse_edge_list(&text)
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<(), GraphError> {
        std::fs::write(path, self.to_edge_list()).map_err(|e| GraphError::Io(e.to_string()))
    }
}

fn parse_pair(line: usize, text: &str) -> Result<(usize, usize), GraphError> {
    let mut it = text.split_whitespace().map(str::parse::<usize>);
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
        _ => Err(GraphError::Parse {
            line,
            msg: format!("expected two non-negative integers, got {text:?}"),
        }),
    }
}

pub fn build_cycle(n: usize) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(GraphError::InvalidParameter(format!(
            "cycle needs n >= 3, got {n}"
        )));
    }
    check_size(n as u128)?;
    let adj = (0..n).map(|v| vec![(v + n - 1) % n, (v + 1) % n]).collect();
    Graph::from_adjacency(adj)
}

/// `dim`-dimensional grid of side `side` with wraparound.
pub fn build_torus(side: usize, dim: usize) -> Result<Graph, GraphError> {
    if side < 3 {
        return Err(GraphError::InvalidParameter(format!(
            "torus needs side >= 3, got {side}"
        )));
    }
    if dim == 0 {
        return Err(GraphError::InvalidParameter("torus needs dim >= 1".into()));
    }
    let requested = (side as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    check_size(requested)?;
    let n = requested as usize;
    let mut adj = vec![Vec::with_capacity(2 * dim); n];
    for (v, list) in adj.iter_mut().enumerate() {
        let mut stride = 1;
        for _ in 0..dim {
            let coord = (v / stride) % side;
            let base = v - coord * stride;
            list.push(base + ((coord + 1) % side) * stride);
            list.push(base + ((coord + side - 1) % side) * stride);
            stride *= side;
        }
    }
    Graph::from_adjacency(adj)
}

pub fn build_complete(n: usize) -> Result<Graph, GraphError> {
    if n < 2 {
        return Err(GraphError::InvalidParameter(format!(
            "complete graph needs n >= 2, got {n}"
        )));
    }
    check_size(n as u128)?;
    let adj = (0..n)
        .map(|v| (0..n).filter(|&w| w != v).collect())
        .collect();
    Graph::from_adjacency(adj)
}

/// Random geometric graph on `[0,1]^2`: nodes closer than `radius` are
/// adjacent. Draws are repeated until the graph is connected, so the result
/// is distributed as the geometric graph conditioned on connectivity.
pub fn build_random_geometric(n: usize, radius: f64, seed: u64) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidParameter("n must be positive".into()));
    }
    if !(radius > 0.0 && radius <= std::f64::consts::SQRT_2) {
        return Err(GraphError::InvalidParameter(format!(
            "radius must lie in (0, sqrt 2], got {radius}"
        )));
    }
    check_size(n as u128)?;
    let mut rng = stream_rng(seed, 0);
    let r2 = radius * radius;
    for _ in 0..GEOMETRIC_ATTEMPTS {
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
            .collect();
        let mut adj = vec![Vec::new(); n];
        for u in 0..n {
            for v in (u + 1)..n {
                let (dx, dy) = (pts[u].0 - pts[v].0, pts[u].1 - pts[v].1);
                if dx * dx + dy * dy < r2 {
                    adj[u].push(v);
                    adj[v].push(u);
                }
            }
        }
        match Graph::from_adjacency(adj) {
            Ok(g) => return Ok(g),
            Err(GraphError::Disconnected) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(GraphError::GeometricNotConnected {
        n,
        radius,
        attempts: GEOMETRIC_ATTEMPTS,
    })
}

fn check_size(requested: u128) -> Result<(), GraphError> {
    if requested > MAX_NODES as u128 {
        return Err(GraphError::TooLarge {
            requested,
            limit: MAX_NODES,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_well_formed(g: &Graph) {
        let mut deg_sum = 0;
        for v in 0..g.node_count() {
            deg_sum += g.degree(v);
            for &w in g.neighbors(v) {
                assert_ne!(v, w);
                assert!(g.has_edge(w, v), "asymmetric edge {v}-{w}");
            }
        }
        assert_eq!(deg_sum, 2 * g.edge_count());
        assert!(g.is_connected());
    }

    #[test]
    fn cycle_basics() {
        let g = build_cycle(3).unwrap();
        assert_eq!(g.regular_degree(), Some(2));
        assert_eq!(g.edge_count(), 3);
        assert_eq!(build_cycle(4).unwrap().diameter(), 2);
        let g = build_cycle(50).unwrap();
        assert_eq!(g.edge_count(), 50);
        assert_eq!(g.diameter(), 25);
        assert!(build_cycle(2).is_err());
    }

    #[test]
    fn torus_basics() {
        assert_eq!(build_torus(3, 1).unwrap(), build_cycle(3).unwrap());
        let g = build_torus(4, 2).unwrap();
        assert_eq!(g.node_count(), 16);
        assert_eq!(g.regular_degree(), Some(4));
        assert_eq!(g.diameter(), 4);
        let g = build_torus(5, 2).unwrap();
        assert_eq!(g.node_count(), 25);
        assert_eq!(g.edge_count(), 50);
        assert!(matches!(
            build_torus(10, 7),
            Err(GraphError::TooLarge { .. })
        ));
        assert!(build_torus(2, 2).is_err());
    }

    #[test]
    fn complete_basics() {
        let g = build_complete(2).unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
        assert_eq!(build_complete(5).unwrap().edge_count(), 10);
        assert_eq!(build_complete(5).unwrap().diameter(), 1);
        assert_eq!(build_complete(50).unwrap().regular_degree(), Some(49));
        assert!(build_complete(1).is_err());
    }

    #[test]
    fn geometric_is_deterministic_and_connected() {
        let a = build_random_geometric(50, 0.3, 11).unwrap();
        let b = build_random_geometric(50, 0.3, 11).unwrap();
        assert_eq!(a, b);
        assert_well_formed(&a);
        let g = build_random_geometric(2, std::f64::consts::SQRT_2, 3).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn geometric_rejects_hopeless_radius() {
        let err = build_random_geometric(200, 0.01, 1).unwrap_err();
        assert!(matches!(err, GraphError::GeometricNotConnected { .. }));
        assert!(build_random_geometric(5, 2.0, 1).is_err());
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert_eq!(
            Graph::from_edges(3, &[(0, 1)]),
            Err(GraphError::Disconnected)
        );
        assert!(Graph::from_edges(2, &[(0, 0)]).is_err());
        assert!(Graph::from_edges(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn edge_list_errors() {
        assert!(Graph::parse_edge_list("").is_err());
        assert!(Graph::parse_edge_list("2 1\n1 0\n").is_err());
        assert!(Graph::parse_edge_list("3 3\n0 1\n1 2\n").is_err());
        assert!(Graph::parse_edge_list("2 1\n0 x\n").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn builders_are_well_formed(side in 3usize..7, dim in 1usize..4, n in 3usize..40) {
            assert_well_formed(&build_cycle(n).unwrap());
            assert_well_formed(&build_complete(n).unwrap());
            let t = build_torus(side, dim).unwrap();
            assert_well_formed(&t);
            prop_assert_eq!(t.edge_count(), t.node_count() * dim);
        }

        #[test]
        fn edge_list_round_trips(n in 2usize..30, seed in any::<u64>()) {
            let g = build_random_geometric(n, 0.9, seed).unwrap();
            prop_assert_eq!(Graph::parse_edge_list(&g.to_edge_list()).unwrap(), g);
        }
    }
}
