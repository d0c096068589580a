//! Immutable sparse multigraph.
//!
//! Edges are undirected and may repeat (multi-edges) or join a node to itself
//! (self-loops). A self-loop contributes 2 to the degree of its node and 1 to
//! the edge count `m`, so that `sum(degrees) == 2 * m` always holds.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    m: u64,
    degrees: Vec<u64>,
    self_loops: Vec<u64>,
    // CSR adjacency without self-loops; one entry per distinct neighbor.
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    multiplicity: Vec<u32>,
    edges: Vec<(u32, u32)>,
    labels: Vec<String>,
}

impl Graph {
    /// Builds a graph on nodes `0..n` from a list of undirected edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        Self::build(n, edges, labels)
    }

    fn build(n: usize, edges: &[(usize, usize)], labels: Vec<String>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if n > u32::MAX as usize {
            return Err(Error::Parameter(format!("{n} nodes exceeds the supported maximum")));
        }
        let mut degrees = vec![0u64; n];
        let mut self_loops = vec![0u64; n];
        let mut counts = vec![0usize; n];
        for &(u, v) in edges {
            for id in [u, v] {
                if id >= n {
                    return Err(Error::NodeOutOfRange { id, n });
                }
            }
            degrees[u] += 1;
            degrees[v] += 1;
            if u == v {
                self_loops[u] += 1;
            } else {
                counts[u] += 1;
                counts[v] += 1;
            }
        }

        let mut raw_offsets = Vec::with_capacity(n + 1);
        raw_offsets.push(0usize);
        for &c in &counts {
            raw_offsets.push(raw_offsets.last().unwrap() + c);
        }
        let mut fill = raw_offsets.clone();
        let mut raw = vec![0u32; *raw_offsets.last().unwrap()];
        for &(u, v) in edges {
            if u != v {
                raw[fill[u]] = v as u32;
                fill[u] += 1;
                raw[fill[v]] = u as u32;
                fill[v] += 1;
            }
        }

        // Collapse repeated neighbors into (neighbor, multiplicity) pairs.
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(raw.len());
        let mut multiplicity = Vec::with_capacity(raw.len());
        offsets.push(0);
        for i in 0..n {
            let row = &mut raw[raw_offsets[i]..raw_offsets[i + 1]];
            row.sort_unstable();
            let mut j = 0;
            while j < row.len() {
                let mut run = 1;
                while j + run < row.len() && row[j + run] == row[j] {
                    run += 1;
                }
                neighbors.push(row[j]);
                multiplicity.push(run as u32);
                j += run;
            }
            offsets.push(neighbors.len());
        }

        Ok(Graph {
            n,
            m: edges.len() as u64,
            degrees,
            self_loops,
            offsets,
            neighbors,
            multiplicity,
            edges: edges.iter().map(|&(u, v)| (u as u32, v as u32)).collect(),
            labels,
        })
    }

    /// Reads a whitespace-separated edge list.
    ///
    /// Node tokens are arbitrary strings and are mapped to dense ids in order of
    /// first appearance. Blank lines and lines starting with `#` are skipped.
    pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut labels = Vec::new();
        let mut edges = Vec::new();
        for (index, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 2 {
                return Err(Error::Parse { line: index + 1, found: tokens.len() });
            }
            let mut endpoint = |token: &str| {
                *ids.entry(token.to_owned()).or_insert_with(|| {
                    labels.push(token.to_owned());
                    labels.len() - 1
                })
            };
            let u = endpoint(tokens[0]);
            let v = endpoint(tokens[1]);
            edges.push((u, v));
        }
        if edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        Self::build(labels.len(), &edges, labels)
    }

    pub fn load_edge_list_str(text: &str) -> Result<Self> {
        Self::load_edge_list(text.as_bytes())
    }

    /// Writes the graph back out in the edge-list format, one line per edge,
    /// using the original node labels.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# nodes: {}, edges: {}", self.n, self.m)?;
        for &(u, v) in &self.edges {
            writeln!(out, "{} {}", self.labels[u as usize], self.labels[v as usize])?;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Average edge probability `2m / n^2`.
    pub fn p(&self) -> f64 {
        2.0 * self.m as f64 / (self.n as f64 * self.n as f64)
    }

    pub fn degree(&self, node: usize) -> u64 {
        self.degrees[node]
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    /// Number of self-loops at `node` (half the diagonal adjacency entry).
    pub fn self_loops(&self, node: usize) -> u64 {
        self.self_loops[node]
    }

    /// Distinct neighbors of `node` other than itself, with edge multiplicities.
    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let range = self.offsets[node]..self.offsets[node + 1];
        self.neighbors[range.clone()]
            .iter()
            .zip(&self.multiplicity[range])
            .map(|(&v, &c)| (v as usize, c))
    }

    /// Raw CSR slices for the sampler's hot loop.
    #[inline]
    pub(crate) fn adjacency(&self, node: usize) -> (&[u32], &[u32]) {
        let range = self.offsets[node]..self.offsets[node + 1];
        (&self.neighbors[range.clone()], &self.multiplicity[range])
    }

    /// Number of edges joining `u` and `v`; for `u == v` this is the self-loop count.
    pub fn multiplicity(&self, u: usize, v: usize) -> u64 {
        if u == v {
            return self.self_loops[u];
        }
        let (nbrs, mult) = self.adjacency(u);
        match nbrs.binary_search(&(v as u32)) {
            Ok(at) => mult[at] as u64,
            Err(_) => 0,
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(u, v)| (u as usize, v as usize))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Sum of the degrees of the nodes in `subset`.
    pub fn degree_sum(&self, subset: &[usize]) -> Result<u64> {
        subset.iter().try_fold(0u64, |acc, &i| {
            if i >= self.n {
                Err(Error::NodeOutOfRange { id: i, n: self.n })
            } else {
                Ok(acc + self.degrees[i])
            }
        })
    }
}
