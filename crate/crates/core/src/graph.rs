//! Simple undirected graphs, Erdős–Rényi sampling and structural statistics.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Default number of whole-graph redraws before giving up on a `G(n, p)` draw
/// free of isolated vertices.
pub const DEFAULT_RETRY_BUDGET: u32 = 10_000;

/// Undirected simple graph on vertices `0..n`.
///
/// Edges are stored canonically as `(u, v)` with `u < v`, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from an arbitrary edge list. Self-loops, duplicates and
    /// out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {a}")));
            }
            for v in [a, b] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate edge ({}, {})",
                    a.min(b),
                    a.max(b)
                )));
            }
        }
        Ok(Self::from_canonical(n, set.into_iter().collect()))
    }

    /// `edges` must already be canonical, sorted and duplicate-free.
    pub(crate) fn from_canonical(n: usize, edges: Vec<(usize, usize)>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Graph { n, edges, adj }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .collect();
        Self::from_canonical(n, edges)
    }

    pub fn path(n: usize) -> Self {
        Self::from_canonical(n, (1..n).map(|v| (v - 1, v)).collect())
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        if n >= 3 {
            edges.push((0, n - 1));
            edges.sort_unstable();
        }
        Self::from_canonical(n, edges)
    }

    /// Star `K_{1,leaves}` with centre 0.
    pub fn star(leaves: usize) -> Self {
        Self::from_canonical(leaves + 1, (1..=leaves).map(|v| (0, v)).collect())
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidArgument("permutation length mismatch".into()));
        }
        Self::from_edges(self.n, self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))
    }

    pub fn stats(&self) -> GraphStats {
        graph_stats(self)
    }
}

/// Samples `G(n, p)` conditioned on every vertex having degree at least one.
///
/// The whole graph is redrawn while it contains an isolated vertex, up to
/// [`DEFAULT_RETRY_BUDGET`] draws.
pub fn sample_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    sample_erdos_renyi_with_budget(n, p, seed, DEFAULT_RETRY_BUDGET)
}

pub fn sample_erdos_renyi_with_budget(
    n: usize,
    p: f64,
    seed: u64,
    retry_budget: u32,
) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "edge probability {p} not in [0, 1]"
        )));
    }
    let mut rng = seed::rng(seed);
    for _ in 0..retry_budget {
        let mut edges = Vec::new();
        let mut degree = vec![0usize; n];
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                    degree[u] += 1;
                    degree[v] += 1;
                }
            }
        }
        if degree.iter().all(|&d| d > 0) {
            return Ok(Graph::from_canonical(n, edges));
        }
    }
    Err(Error::RetryBudgetExhausted {
        n,
        p,
        attempts: retry_budget,
    })
}

pub fn complement(g: &Graph) -> Graph {
    let n = g.num_vertices();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2 - g.num_edges());
    for u in 0..n {
        let nb = g.neighbors(u);
        let mut k = nb.partition_point(|&w| w <= u);
        for v in (u + 1)..n {
            if k < nb.len() && nb[k] == v {
                k += 1;
            } else {
                edges.push((u, v));
            }
        }
    }
    Graph::from_canonical(n, edges)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub density: f64,
    pub min_degree: usize,
    pub max_degree: usize,
    pub mean_degree: f64,
    pub num_nodes: usize,
    pub num_edges: usize,
    pub num_triangles: u64,
}

pub fn graph_stats(g: &Graph) -> GraphStats {
    let n = g.num_vertices();
    let m = g.num_edges();
    let density = if n >= 2 {
        2.0 * m as f64 / (n as f64 * (n as f64 - 1.0))
    } else {
        0.0
    };
    let degrees = (0..n).map(|v| g.degree(v));
    GraphStats {
        density,
        min_degree: degrees.clone().min().unwrap_or(0),
        max_degree: degrees.max().unwrap_or(0),
        mean_degree: if n > 0 {
            2.0 * m as f64 / n as f64
        } else {
            0.0
        },
        num_nodes: n,
        num_edges: m,
        num_triangles: count_triangles(g),
    }
}

/// Exact triangle count by intersecting forward adjacency lists.
pub fn count_triangles(g: &Graph) -> u64 {
    let mut count = 0u64;
    for &(u, v) in g.edges() {
        // only common neighbours w > v, so each triangle u < v < w is seen once
        let a = g.neighbors(u);
        let b = g.neighbors(v);
        let (mut i, mut j) = (
            a.partition_point(|&w| w <= v),
            b.partition_point(|&w| w <= v),
        );
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    count
}

/// One line of a graphs file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub id: u64,
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    pub gen_seed: u64,
    pub target_density: f64,
}

impl GraphRecord {
    pub fn new(id: u64, g: &Graph, gen_seed: u64, target_density: f64) -> Self {
        GraphRecord {
            id,
            n: g.num_vertices(),
            edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(),
            gen_seed,
            target_density,
        }
    }

    pub fn graph(&self) -> Result<Graph> {
        Graph::from_edges(self.n, self.edges.iter().map(|e| (e[0], e[1])))
    }
}

/// Writes one JSON document per line.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Malformed {
            line: i + 1,
            msg: e.to_string(),
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_triangles(g: &Graph) -> u64 {
        let n = g.num_vertices();
        let mut c = 0;
        for a in 0..n {
            for b in (a + 1)..n {
                for d in (b + 1)..n {
                    if g.has_edge(a, b) && g.has_edge(b, d) && g.has_edge(a, d) {
                        c += 1;
                    }
                }
            }
        }
        c
    }

    #[test]
    fn full_probability_gives_complete_graph() {
        for seed in 0..5 {
            let g = sample_erdos_renyi(5, 1.0, seed).unwrap();
            assert_eq!(g.num_edges(), 10);
            assert_eq!(g, Graph::complete(5));
        }
    }

    #[test]
    fn zero_probability_exhausts_budget() {
        let err = sample_erdos_renyi_with_budget(20, 0.0, 1, 50).unwrap_err();
        assert!(matches!(
            err,
            Error::RetryBudgetExhausted { attempts: 50, .. }
        ));
        assert!(sample_erdos_renyi(20, 0.0, 1).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_erdos_renyi(20, 0.5, 42).unwrap();
        let b = sample_erdos_renyi(20, 0.5, 42).unwrap();
        assert_eq!(a.edges(), b.edges());
        let c = sample_erdos_renyi(20, 0.5, 43).unwrap();
        assert_ne!(a.edges(), c.edges());
    }

    #[test]
    fn sampled_graphs_have_no_isolated_vertices() {
        for seed in 0..50 {
            let g = sample_erdos_renyi(25, 0.12, seed).unwrap();
            assert!(g.stats().min_degree >= 1);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(sample_erdos_renyi(0, 0.5, 0).is_err());
        assert!(sample_erdos_renyi(5, 1.5, 0).is_err());
        assert!(Graph::from_edges(3, [(0, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
        assert!(Graph::from_edges(3, [(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn complement_examples() {
        assert_eq!(complement(&Graph::complete(4)), Graph::empty(4));
        let c = complement(&Graph::path(3));
        assert_eq!(c.edges(), &[(0, 2)]);
    }

    #[test]
    fn complement_round_trip_and_edge_sum() {
        for seed in 0..40 {
            let n = 1 + (seed as usize % 10);
            let mut rng = seed::rng(seed);
            let p = rng.random::<f64>();
            let edges: Vec<_> = (0..n)
                .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
                .filter(|_| rng.random::<f64>() < p)
                .collect();
            let g = Graph::from_edges(n, edges).unwrap();
            let c = complement(&g);
            assert_eq!(c.num_vertices(), n);
            assert_eq!(g.num_edges() + c.num_edges(), n * (n - 1) / 2);
            assert_eq!(complement(&c), g);
        }
    }

    #[test]
    fn stats_examples() {
        let s = graph_stats(&Graph::complete(4));
        assert_eq!(s.density, 1.0);
        assert_eq!((s.min_degree, s.max_degree), (3, 3));
        assert_eq!(s.mean_degree, 3.0);
        assert_eq!((s.num_nodes, s.num_edges, s.num_triangles), (4, 6, 4));

        let s = graph_stats(&Graph::path(3));
        assert!((s.density - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!((s.min_degree, s.max_degree, s.num_triangles), (1, 2, 0));

        let s = graph_stats(&Graph::empty(1));
        assert_eq!(s.density, 0.0);
    }

    #[test]
    fn triangles_match_triple_enumeration() {
        for seed in 0..20 {
            let g = sample_erdos_renyi(12, 0.5, seed).unwrap();
            assert_eq!(count_triangles(&g), brute_triangles(&g));
        }
        for n in 3..15u64 {
            assert_eq!(
                count_triangles(&Graph::complete(n as usize)),
                n * (n - 1) * (n - 2) / 6
            );
        }
    }

    #[test]
    fn record_round_trip() {
        let g = sample_erdos_renyi(9, 0.4, 3).unwrap();
        let rec = GraphRecord::new(7, &g, 3, 0.4);
        let json = serde_json::to_string(&rec).unwrap();
        let back: GraphRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.graph().unwrap(), g);
    }
}
