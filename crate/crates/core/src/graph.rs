//! Finite connected graphs with a fixed edge orientation.
//!
//! Vertices are the contiguous ids `0..vertex_count`. Every edge is stored as
//! an ordered pair `(tail, head)`; the gradient of a vertex function on that
//! edge is `f(tail) - f(head)`. Generators and the edge-list parser use the
//! canonical orientation `tail < head`.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::WeightedSpace;

/// Largest hypercube dimension accepted by [`hypercube`].
pub const MAX_HYPERCUBE_DIM: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Validates and builds a graph, keeping the given orientation.
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (index, &(u, v)) in edges.iter().enumerate() {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidEdge {
                    index,
                    message: format!("vertex id out of range 0..{vertex_count}"),
                });
            }
            if u == v {
                return Err(Error::InvalidEdge {
                    index,
                    message: format!("self-loop at vertex {u}"),
                });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidEdge {
                    index,
                    message: format!("duplicate edge {{{u}, {v}}}"),
                });
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        if let Some(vertex) = adjacency.iter().position(Vec::is_empty) {
            return Err(Error::IsolatedVertex { vertex });
        }
        let graph = Self {
            vertex_count,
            edges,
            adjacency,
        };
        if let Some(vertex) = graph.bfs(0).iter().position(Option::is_none) {
            return Err(Error::Disconnected { vertex });
        }
        Ok(graph)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Oriented edges `(tail, head)`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Same graph with the orientation of the listed edges reversed.
    pub fn with_flipped_edges(&self, flips: &[usize]) -> Self {
        let mut out = self.clone();
        for &e in flips {
            let (u, v) = out.edges[e];
            out.edges[e] = (v, u);
        }
        out
    }

    /// Same graph with every edge reoriented as `tail < head`.
    pub fn canonical(&self) -> Self {
        let mut out = self.clone();
        for e in &mut out.edges {
            *e = (e.0.min(e.1), e.0.max(e.1));
        }
        out
    }

    /// Relabels vertex `v` as `perm[v]`; edge order and orientation follow.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.vertex_count {
            return Err(Error::DimensionMismatch {
                expected: self.vertex_count,
                found: perm.len(),
            });
        }
        let edges = self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        Self::new(self.vertex_count, edges)
    }

    /// Unordered edge set, for comparisons that ignore orientation and order.
    pub fn edge_set(&self) -> HashSet<(usize, usize)> {
        self.edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect()
    }

    fn bfs(&self, source: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.vertex_count];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &self.adjacency[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Edge-list document with one `u v` line per edge, in stored orientation.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(self.edges.len() * 8);
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

/// Parses an edge-list document: `u v` per line, `#` starts a comment.
///
/// The vertex count is one more than the largest id seen; every id below it
/// must carry an edge. Edges are canonically oriented (`tail < head`).
pub fn from_edge_list(text: &str) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut lines = Vec::new();
    let mut seen = HashSet::new();
    let mut max_id = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected two vertex ids, found {} fields", fields.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("invalid vertex id {s:?}"),
            })
        };
        let (u, v) = (parse(fields[0])?, parse(fields[1])?);
        if u == v {
            return Err(Error::Parse {
                line,
                message: format!("self-loop at vertex {u}"),
            });
        }
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate edge {} {}", key.0, key.1),
            });
        }
        max_id = max_id.max(key.1);
        edges.push(key);
        lines.push(line);
    }
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    Graph::new(max_id + 1, edges).map_err(|e| match e {
        Error::InvalidEdge { index, message } => Error::Parse {
            line: lines[index],
            message,
        },
        other => other,
    })
}

/// Complete graph on `m` vertices.
pub fn clique(m: usize) -> Result<Graph> {
    if m < 2 {
        return Err(Error::InvalidSize {
            family: "clique",
            value: m,
            min: 2,
        });
    }
    let edges = (0..m)
        .flat_map(|u| (u + 1..m).map(move |v| (u, v)))
        .collect();
    Graph::new(m, edges)
}

/// The cube `{0,1}^d`; vertex ids are the bit patterns, adjacent iff they differ in one bit.
pub fn hypercube(d: usize) -> Result<Graph> {
    if d < 1 {
        return Err(Error::InvalidSize {
            family: "hypercube",
            value: d,
            min: 1,
        });
    }
    if d > MAX_HYPERCUBE_DIM {
        return Err(Error::SizeLimit {
            what: "hypercube dimension",
            value: d,
            limit: MAX_HYPERCUBE_DIM,
        });
    }
    let n = 1usize << d;
    let mut edges = Vec::with_capacity(d << (d - 1));
    for u in 0..n {
        for bit in 0..d {
            let v = u ^ (1 << bit);
            if u < v {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges)
}

pub fn path(m: usize) -> Result<Graph> {
    if m < 2 {
        return Err(Error::InvalidSize {
            family: "path",
            value: m,
            min: 2,
        });
    }
    Graph::new(m, (0..m - 1).map(|i| (i, i + 1)).collect())
}

pub fn cycle(m: usize) -> Result<Graph> {
    if m < 3 {
        return Err(Error::InvalidSize {
            family: "cycle",
            value: m,
            min: 3,
        });
    }
    let mut edges: Vec<_> = (0..m - 1).map(|i| (i, i + 1)).collect();
    edges.push((0, m - 1));
    Graph::new(m, edges)
}

/// Random connected graph: a random spanning tree plus each remaining pair
/// independently with probability `extra_edge_prob`.
pub fn random_connected(m: usize, extra_edge_prob: f64, seed: u64) -> Result<Graph> {
    if m < 2 {
        return Err(Error::InvalidSize {
            family: "random",
            value: m,
            min: 2,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng);
    let mut present = HashSet::new();
    for i in 1..m {
        let parent = order[rng.random_range(0..i)];
        let child = order[i];
        present.insert((parent.min(child), parent.max(child)));
    }
    for u in 0..m {
        for v in u + 1..m {
            if !present.contains(&(u, v)) && rng.random_bool(extra_edge_prob.clamp(0.0, 1.0)) {
                present.insert((u, v));
            }
        }
    }
    let mut edges: Vec<_> = present.into_iter().collect();
    edges.sort_unstable();
    Graph::new(m, edges)
}

/// Stationary measure of the simple random walk, `μ(x) = deg(x) / 2|E|`.
pub fn stationary_measure(g: &Graph) -> WeightedSpace {
    let total = 2.0 * g.edge_count() as f64;
    let weights = g.degrees().into_iter().map(|d| d as f64 / total).collect();
    WeightedSpace::probability(weights).expect("stationary measure of a valid graph is a probability")
}

/// Uniform probability on the edges.
pub fn edge_measure(g: &Graph) -> WeightedSpace {
    WeightedSpace::uniform(g.edge_count()).expect("valid graphs have edges")
}

/// Dense all-pairs shortest-path distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metric {
    n: usize,
    dist: Vec<u32>,
}

impl Metric {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.dist[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[u32] {
        &self.dist[x * self.n..(x + 1) * self.n]
    }

    pub fn diameter(&self) -> u32 {
        self.dist.iter().copied().max().unwrap_or(0)
    }
}

/// All-pairs BFS; valid graphs are connected so every entry is finite.
pub fn shortest_path_metric(g: &Graph) -> Metric {
    let n = g.vertex_count();
    let mut dist = Vec::with_capacity(n * n);
    for s in 0..n {
        dist.extend(g.bfs(s).into_iter().map(|d| d.expect("connected graph")));
    }
    Metric { n, dist }
}

/// Named generator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Clique,
    Hypercube,
    Path,
    Cycle,
}

impl Family {
    pub fn build(self, param: usize) -> Result<Graph> {
        match self {
            Family::Clique => clique(param),
            Family::Hypercube => hypercube(param),
            Family::Path => path(param),
            Family::Cycle => cycle(param),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Clique => "clique",
            Family::Hypercube => "hypercube",
            Family::Path => "path",
            Family::Cycle => "cycle",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "clique" => Ok(Family::Clique),
            "hypercube" => Ok(Family::Hypercube),
            "path" => Ok(Family::Path),
            "cycle" => Ok(Family::Cycle),
            other => Err(format!(
                "unknown family {other:?} (expected clique, hypercube, path or cycle)"
            )),
        }
    }
}
