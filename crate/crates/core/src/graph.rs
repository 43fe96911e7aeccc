//! Hamming graphs of solution spaces and the brute-force median test.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::space::SolutionSpace;

/// Simple undirected graph joining states at Hamming distance one.
#[derive(Clone, Debug)]
pub struct HammingGraph {
    labels: Vec<Bits>,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl HammingGraph {
    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn labels(&self) -> &[Bits] {
        &self.labels
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors[u].binary_search(&v).is_ok()
    }

    /// Edge list text, one `u v` per line.
    pub fn edges_text(&self) -> String {
        let mut out = String::new();
        for (u, v) in &self.edges {
            writeln!(out, "{u} {v}").unwrap();
        }
        out
    }

    /// Label file text, one `index bitstring` per line.
    pub fn labels_text(&self) -> String {
        let mut out = String::new();
        for (i, l) in self.labels.iter().enumerate() {
            writeln!(out, "{i} {l}").unwrap();
        }
        out
    }
}

pub fn build_hamming_graph(space: &SolutionSpace) -> HammingGraph {
    let n = space.len();
    let mut neighbors = vec![Vec::new(); n];
    let mut edges = Vec::new();
    for (i, s) in space.states().iter().enumerate() {
        for var in 0..space.num_vars() {
            if let Some(j) = space.index_of(&s.flipped(var)) {
                neighbors[i].push(j);
                if i < j {
                    edges.push((i, j));
                }
            }
        }
    }
    for nb in &mut neighbors {
        nb.sort_unstable();
    }
    edges.sort_unstable();
    HammingGraph {
        labels: space.states().to_vec(),
        edges,
        neighbors,
    }
}

/// Row-major matrix of shortest-path lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
}

impl DistanceMatrix {
    /// Marker for pairs in different components.
    pub const UNREACHABLE: u32 = u32::MAX;

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> u32 {
        self.data[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[u32] {
        &self.data[u * self.n..(u + 1) * self.n]
    }

    pub fn is_connected(&self) -> bool {
        self.first_unreachable().is_none()
    }

    fn first_unreachable(&self) -> Option<usize> {
        self.row(0).iter().position(|&d| d == Self::UNREACHABLE)
    }
}

/// Breadth-first search from every vertex.
pub fn all_pairs_distances(graph: &HammingGraph) -> DistanceMatrix {
    let n = graph.vertex_count();
    let rows: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|src| {
            let mut dist = vec![DistanceMatrix::UNREACHABLE; n];
            let mut queue = VecDeque::new();
            dist[src] = 0;
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                for &w in graph.neighbors(u) {
                    if dist[w] == DistanceMatrix::UNREACHABLE {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                }
            }
            dist
        })
        .collect();
    DistanceMatrix { n, data: rows.concat() }
}

/// Settings for [`is_median_graph_with`].
#[derive(Clone, Copy, Debug)]
pub struct MedianTestOptions {
    /// Largest vertex count accepted by the triple scan.
    pub max_vertices: usize,
    /// Stop at the first violating triple instead of scanning everything.
    pub early_exit: bool,
}

impl Default for MedianTestOptions {
    fn default() -> Self {
        MedianTestOptions {
            max_vertices: 2000,
            early_exit: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MedianViolation {
    pub triple: (usize, usize, usize),
    /// Number of common-interval vertices found (0 or at least 2).
    pub median_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MedianVerdict {
    pub is_median: bool,
    /// Lexicographically smallest violating triple, when one exists.
    pub witness: Option<MedianViolation>,
    /// Violations seen; 1 when the scan exits early.
    pub violations: usize,
}

pub fn is_median_graph(graph: &HammingGraph) -> Result<MedianVerdict> {
    is_median_graph_with(graph, MedianTestOptions::default())
}

/// Checks that every triple of distinct vertices has exactly one vertex
/// lying on a geodesic between each pair. Triples with a repeated vertex
/// always have a unique median and are skipped.
pub fn is_median_graph_with(graph: &HammingGraph, opts: MedianTestOptions) -> Result<MedianVerdict> {
    let n = graph.vertex_count();
    if n > opts.max_vertices {
        return Err(Error::Capacity {
            what: "vertex count for the median test",
            got: n,
            limit: opts.max_vertices,
        });
    }
    let dist = all_pairs_distances(graph);
    if let Some(unreachable) = dist.first_unreachable() {
        return Err(Error::Disconnected { unreachable });
    }

    let scan_u = |u: usize| -> (usize, Option<MedianViolation>) {
        let du = dist.row(u);
        let mut count = 0;
        let mut first = None;
        for v in u + 1..n {
            let dv = dist.row(v);
            let duv = du[v];
            for w in v + 1..n {
                let dw = dist.row(w);
                let (duw, dvw) = (du[w], dv[w]);
                let mut medians = 0;
                for m in 0..n {
                    if du[m] + dv[m] == duv && dv[m] + dw[m] == dvw && du[m] + dw[m] == duw {
                        medians += 1;
                        if medians > 1 {
                            break;
                        }
                    }
                }
                if medians != 1 {
                    count += 1;
                    if first.is_none() {
                        first = Some(MedianViolation {
                            triple: (u, v, w),
                            median_count: medians,
                        });
                    }
                    if opts.early_exit {
                        return (count, first);
                    }
                }
            }
        }
        (count, first)
    };

    let (violations, witness) = if opts.early_exit {
        match (0..n).into_par_iter().find_map_first(|u| scan_u(u).1) {
            Some(v) => (1, Some(v)),
            None => (0, None),
        }
    } else {
        let per_u: Vec<_> = (0..n).into_par_iter().map(scan_u).collect();
        let total = per_u.iter().map(|(c, _)| c).sum();
        (total, per_u.into_iter().find_map(|(_, w)| w))
    };
    Ok(MedianVerdict {
        is_median: violations == 0,
        witness,
        violations,
    })
}
