//! Group assignment with incrementally maintained block statistics.
//!
//! Groups are labelled `0..k` internally and kept contiguous after every move.
//! JSON label arrays use `1..=k`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    /// Move a node into another existing group ("type 1").
    ToExisting,
    /// Move a node into a newly created group ("type 2").
    ToNew,
}

/// A proposed relocation of one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub kind: MoveKind,
    pub node: usize,
    pub from: usize,
    /// Destination label before relabelling. For [`MoveKind::ToNew`] this is
    /// always `k`, the label given to the new group.
    pub to: usize,
    /// The node is the only member of `from`.
    pub empties_source: bool,
    /// The move increases `k`.
    pub creates_group: bool,
}

impl Move {
    /// Number of groups after the move is applied in a state with `k` groups.
    pub fn k_after(&self, k: usize) -> usize {
        match (self.kind, self.empties_source) {
            (MoveKind::ToExisting, true) => k - 1,
            (MoveKind::ToExisting, false) => k,
            (MoveKind::ToNew, true) => k,
            (MoveKind::ToNew, false) => k + 1,
        }
    }

    /// A singleton moved into a fresh group: the partition is unchanged.
    pub fn is_identity(&self) -> bool {
        self.kind == MoveKind::ToNew && self.empties_source
    }
}

/// Edges from one node into each group, excluding self-loops.
#[derive(Debug, Clone, Default)]
pub struct LinkTally {
    counts: Vec<u64>,
    touched: Vec<usize>,
    pub(crate) node: usize,
    pub(crate) self_loops: u64,
    pub(crate) degree: u64,
}

impl LinkTally {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn count(&self, group: usize) -> u64 {
        self.counts.get(group).copied().unwrap_or(0)
    }

    fn reset(&mut self, len: usize) {
        for &t in &self.touched {
            self.counts[t] = 0;
        }
        self.touched.clear();
        if self.counts.len() < len {
            self.counts.resize(len, 0);
        }
    }
}

#[derive(Debug, Clone)]
pub struct PartitionState {
    n: usize,
    k: usize,
    groups: Vec<u32>,
    position: Vec<u32>,
    members: Vec<Vec<u32>>,
    sizes: Vec<u64>,
    degree_sums: Vec<u64>,
    // Dense symmetric matrix with row stride `capacity`; rows at or beyond `k`
    // are kept zero so that a new group can be opened without clearing.
    capacity: usize,
    edge_counts: Vec<u64>,
}

impl PartitionState {
    /// Builds the state from 0-based labels that must cover `0..k` with no gaps.
    pub fn from_assignment(graph: &Graph, labels: &[usize]) -> Result<Self> {
        let n = graph.n();
        if labels.len() != n {
            return Err(Error::Assignment(format!(
                "{} labels given for {} nodes",
                labels.len(),
                n
            )));
        }
        let k = labels.iter().copied().max().map_or(0, |x| x + 1);
        let mut sizes = vec![0u64; k];
        for &l in labels {
            sizes[l] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::Assignment(format!("label {} is used by no node", empty + 1)));
        }

        let capacity = (k + 1).max(4).min(n + 1);
        let mut state = PartitionState {
            n,
            k,
            groups: labels.iter().map(|&l| l as u32).collect(),
            position: vec![0; n],
            members: vec![Vec::new(); capacity],
            sizes: vec![0; capacity],
            degree_sums: vec![0; capacity],
            capacity,
            edge_counts: vec![0; capacity * capacity],
        };
        for (node, &l) in labels.iter().enumerate() {
            state.position[node] = state.members[l].len() as u32;
            state.members[l].push(node as u32);
            state.sizes[l] += 1;
            state.degree_sums[l] += graph.degree(node);
        }
        for (u, v) in graph.edges() {
            let (r, s) = (labels[u], labels[v]);
            if r == s {
                state.edge_counts[r * capacity + r] += 1;
            } else {
                state.edge_counts[r * capacity + s] += 1;
                state.edge_counts[s * capacity + r] += 1;
            }
        }
        Ok(state)
    }

    /// Builds the state from 1-based labels as found in JSON label arrays.
    pub fn from_one_based(graph: &Graph, labels: &[usize]) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::Assignment("labels must start at 1".into()));
        }
        let zero_based: Vec<usize> = labels.iter().map(|&l| l - 1).collect();
        Self::from_assignment(graph, &zero_based)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn group_of(&self, node: usize) -> usize {
        self.groups[node] as usize
    }

    /// 0-based labels.
    pub fn labels(&self) -> Vec<usize> {
        self.groups.iter().map(|&g| g as usize).collect()
    }

    pub fn labels_one_based(&self) -> Vec<usize> {
        self.groups.iter().map(|&g| g as usize + 1).collect()
    }

    #[inline]
    pub fn size(&self, group: usize) -> u64 {
        self.sizes[group]
    }

    /// Group sizes for groups `0..k`.
    pub fn sizes(&self) -> &[u64] {
        &self.sizes[..self.k]
    }

    #[inline]
    pub fn degree_sum(&self, group: usize) -> u64 {
        self.degree_sums[group]
    }

    pub fn degree_sums(&self) -> &[u64] {
        &self.degree_sums[..self.k]
    }

    /// Edges between groups `r` and `s`; for `r == s`, edges within the group.
    #[inline]
    pub fn edge_count(&self, r: usize, s: usize) -> u64 {
        self.edge_counts[r * self.capacity + s]
    }

    pub fn members(&self, group: usize) -> &[u32] {
        &self.members[group]
    }

    /// Uniformly random member of `group`.
    #[inline]
    pub fn random_member<R: Rng + ?Sized>(&self, group: usize, rng: &mut R) -> usize {
        let list = &self.members[group];
        list[rng.random_range(0..list.len())] as usize
    }

    /// A type-1 move of `node` into the existing group `to`.
    pub fn move_to_existing(&self, node: usize, to: usize) -> Result<Move> {
        self.check_node(node)?;
        let from = self.group_of(node);
        if to >= self.k || to == from {
            return Err(Error::InvalidMove(format!(
                "target group {} invalid for node {} in group {} with k = {}",
                to + 1,
                node,
                from + 1,
                self.k
            )));
        }
        let empties = self.sizes[from] == 1;
        Ok(Move {
            kind: MoveKind::ToExisting,
            node,
            from,
            to,
            empties_source: empties,
            creates_group: false,
        })
    }

    /// A type-2 move of `node` into a new group.
    pub fn move_to_new(&self, node: usize) -> Result<Move> {
        self.check_node(node)?;
        let from = self.group_of(node);
        let empties = self.sizes[from] == 1;
        Ok(Move {
            kind: MoveKind::ToNew,
            node,
            from,
            to: self.k,
            empties_source: empties,
            creates_group: !empties,
        })
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node >= self.n {
            return Err(Error::NodeOutOfRange { id: node, n: self.n });
        }
        Ok(())
    }

    /// Checks that `mv` is consistent with the current labels.
    pub fn validate_move(&self, mv: &Move) -> Result<()> {
        self.check_node(mv.node)?;
        let expected = match mv.kind {
            MoveKind::ToExisting => self.move_to_existing(mv.node, mv.to)?,
            MoveKind::ToNew => self.move_to_new(mv.node)?,
        };
        if expected != *mv {
            return Err(Error::InvalidMove(format!(
                "stale move {mv:?}; current state implies {expected:?}"
            )));
        }
        Ok(())
    }

    /// Counts the edges from `node` into each group.
    pub fn tally(&self, graph: &Graph, node: usize, tally: &mut LinkTally) {
        tally.reset(self.capacity);
        let (nbrs, mult) = graph.adjacency(node);
        for (&v, &c) in nbrs.iter().zip(mult) {
            let t = self.groups[v as usize] as usize;
            if tally.counts[t] == 0 {
                tally.touched.push(t);
            }
            tally.counts[t] += c as u64;
        }
        tally.node = node;
        tally.self_loops = graph.self_loops(node);
        tally.degree = graph.degree(node);
    }

    /// Validates and applies a move.
    pub fn apply_move(&mut self, graph: &Graph, mv: &Move) -> Result<()> {
        self.validate_move(mv)?;
        let mut tally = LinkTally::new();
        self.tally(graph, mv.node, &mut tally);
        self.apply_tallied(mv, &tally);
        Ok(())
    }

    /// Applies a move whose tally was computed against the current state.
    /// Runs in `O(d + k)`.
    pub fn apply_tallied(&mut self, mv: &Move, tally: &LinkTally) {
        debug_assert_eq!(tally.node, mv.node);
        if mv.is_identity() {
            // The new group immediately takes over the emptied label.
            return;
        }
        let (r, s) = (mv.from, mv.to);
        if mv.kind == MoveKind::ToNew {
            self.ensure_capacity(self.k + 2);
            self.k += 1;
        }
        let cap = self.capacity;
        let node = mv.node;

        // Block edge counts.
        for &t in &tally.touched {
            if t == r || t == s {
                continue;
            }
            let e = tally.counts[t];
            self.edge_counts[r * cap + t] -= e;
            self.edge_counts[t * cap + r] -= e;
            self.edge_counts[s * cap + t] += e;
            self.edge_counts[t * cap + s] += e;
        }
        let (er, es) = (tally.count(r), tally.count(s));
        let rs = self.edge_counts[r * cap + s] + er - es;
        self.edge_counts[r * cap + s] = rs;
        self.edge_counts[s * cap + r] = rs;
        self.edge_counts[r * cap + r] -= er + tally.self_loops;
        self.edge_counts[s * cap + s] += es + tally.self_loops;

        self.sizes[r] -= 1;
        self.sizes[s] += 1;
        self.degree_sums[r] -= tally.degree;
        self.degree_sums[s] += tally.degree;

        // Membership lists: swap-remove from r, push onto s.
        let at = self.position[node] as usize;
        let list = &mut self.members[r];
        list.swap_remove(at);
        if let Some(&moved) = list.get(at) {
            self.position[moved as usize] = at as u32;
        }
        self.position[node] = self.members[s].len() as u32;
        self.members[s].push(node as u32);
        self.groups[node] = s as u32;

        if mv.kind == MoveKind::ToExisting && mv.empties_source {
            let last = self.k - 1;
            if r != last {
                self.relabel(last, r);
            }
            self.k -= 1;
        }
    }

    /// Moves every statistic of group `from` to the (empty) label `to`.
    fn relabel(&mut self, from: usize, to: usize) {
        debug_assert_eq!(self.sizes[to], 0);
        let cap = self.capacity;
        let moved = std::mem::take(&mut self.members[from]);
        for &v in &moved {
            self.groups[v as usize] = to as u32;
        }
        self.members[to] = moved;
        self.sizes[to] = std::mem::take(&mut self.sizes[from]);
        self.degree_sums[to] = std::mem::take(&mut self.degree_sums[from]);
        for t in 0..self.k {
            if t == from || t == to {
                continue;
            }
            let e = std::mem::take(&mut self.edge_counts[from * cap + t]);
            self.edge_counts[t * cap + from] = 0;
            self.edge_counts[to * cap + t] = e;
            self.edge_counts[t * cap + to] = e;
        }
        let within = std::mem::take(&mut self.edge_counts[from * cap + from]);
        self.edge_counts[to * cap + to] = within;
        self.edge_counts[to * cap + from] = 0;
        self.edge_counts[from * cap + to] = 0;
    }

    fn ensure_capacity(&mut self, needed: usize) {
        if needed <= self.capacity {
            return;
        }
        let new_cap = (self.capacity * 2).max(needed).min(self.n + 1).max(needed);
        let mut counts = vec![0u64; new_cap * new_cap];
        for r in 0..self.k {
            for s in 0..self.k {
                counts[r * new_cap + s] = self.edge_counts[r * self.capacity + s];
            }
        }
        self.edge_counts = counts;
        self.members.resize(new_cap, Vec::new());
        self.sizes.resize(new_cap, 0);
        self.degree_sums.resize(new_cap, 0);
        self.capacity = new_cap;
    }

    /// Compares every statistic against a from-scratch recomputation.
    pub fn verify(&self, graph: &Graph) -> Result<()> {
        let fresh = PartitionState::from_assignment(graph, &self.labels())?;
        if fresh.k != self.k {
            return Err(Error::Assignment(format!("k = {} but labels imply {}", self.k, fresh.k)));
        }
        for r in 0..self.k {
            if fresh.sizes[r] != self.sizes[r] || fresh.degree_sums[r] != self.degree_sums[r] {
                return Err(Error::Assignment(format!("group {} statistics diverged", r + 1)));
            }
            if self.members[r].len() as u64 != self.sizes[r] {
                return Err(Error::Assignment(format!("group {} member list diverged", r + 1)));
            }
            for &v in &self.members[r] {
                let v = v as usize;
                if self.group_of(v) != r || self.members[r][self.position[v] as usize] as usize != v {
                    return Err(Error::Assignment(format!("member index of node {v} diverged")));
                }
            }
            for s in 0..self.k {
                if fresh.edge_count(r, s) != self.edge_count(r, s) {
                    return Err(Error::Assignment(format!(
                        "edge count ({}, {}) diverged",
                        r + 1,
                        s + 1
                    )));
                }
            }
        }
        for r in self.k..self.capacity {
            if self.sizes[r] != 0 || (0..self.capacity).any(|s| self.edge_count(r, s) != 0) {
                return Err(Error::Assignment(format!("unused row {} not cleared", r + 1)));
            }
        }
        Ok(())
    }
}
