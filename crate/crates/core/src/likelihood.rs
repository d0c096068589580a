//! Marginal likelihood of the degree-corrected block model.
//!
//! With node propensities integrated over the simplex of each group and block
//! rates given an exponential prior with mean `p = 2m/n^2`, the likelihood of
//! an assignment is, up to a constant factor,
//!
//! ```text
//! prod_r  n_r^kappa_r (n_r - 1)! / (n_r + kappa_r - 1)!
//!   * prod_{r<s} m_rs! / (p n_r n_s + 1)^(m_rs + 1)
//!   * prod_r     m_rr! / (p n_r^2 / 2 + 1)^(m_rr + 1)
//! ```
//!
//! Everything here works with its logarithm.

use crate::graph::Graph;
use crate::log_factorial::LogFactorialTable;
use crate::partition::{LinkTally, Move, MoveKind, PartitionState};

/// Likelihood evaluator bound to one graph, holding a log-factorial table
/// sized for every argument that can occur on it.
#[derive(Debug, Clone)]
pub struct Evaluator {
    table: LogFactorialTable,
    p: f64,
}

impl Evaluator {
    pub fn new(graph: &Graph) -> Self {
        let max_arg = graph.n() as u64 + 2 * graph.m();
        Evaluator { table: LogFactorialTable::with_capacity(max_arg as usize), p: graph.p() }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn table(&self) -> &LogFactorialTable {
        &self.table
    }

    #[inline]
    fn lnf(&self, x: u64) -> f64 {
        self.table.ln_factorial(x)
    }

    #[inline]
    fn group_term(&self, size: u64, kappa: u64) -> f64 {
        if size == 0 {
            return 0.0;
        }
        kappa as f64 * (size as f64).ln() + self.lnf(size - 1) - self.lnf(size + kappa - 1)
    }

    /// Term for the edges between two distinct groups with `pairs = n_r n_s`.
    #[inline]
    fn between_term(&self, edges: u64, pairs: u64) -> f64 {
        self.lnf(edges) - (edges + 1) as f64 * (self.p * pairs as f64).ln_1p()
    }

    #[inline]
    fn within_term(&self, edges: u64, size: u64) -> f64 {
        let s = size as f64;
        self.lnf(edges) - (edges + 1) as f64 * (0.5 * self.p * s * s).ln_1p()
    }

    /// `ln P(A | g, k)` from the block statistics, in `O(k^2)`.
    pub fn log_marginal(&self, state: &PartitionState) -> f64 {
        let k = state.k();
        let mut total = 0.0;
        for r in 0..k {
            let nr = state.size(r);
            total += self.group_term(nr, state.degree_sum(r));
            total += self.within_term(state.edge_count(r, r), nr);
            for s in r + 1..k {
                total += self.between_term(state.edge_count(r, s), nr * state.size(s));
            }
        }
        total
    }

    /// Change in `ln P(A | g, k)` caused by `mv`, touching only the two groups
    /// involved. `tally` must hold the link counts of the moving node against
    /// the current state.
    pub fn log_ratio(&self, state: &PartitionState, mv: &Move, tally: &LinkTally) -> f64 {
        if mv.is_identity() {
            return 0.0;
        }
        let (r, s) = (mv.from, mv.to);
        let k = state.k();
        let (nr, ns) = (state.size(r), if s < k { state.size(s) } else { 0 });
        let (kr, ks) = (state.degree_sum(r), if s < k { state.degree_sum(s) } else { 0 });
        let (nr2, ns2) = (nr - 1, ns + 1);
        let d = tally.degree;
        let loops = tally.self_loops;

        let mut delta = self.group_term(nr2, kr - d) + self.group_term(ns2, ks + d)
            - self.group_term(nr, kr)
            - self.group_term(ns, ks);

        let (er, es) = (tally.count(r), tally.count(s));
        let (mrr, mss, mrs) = if s < k {
            (state.edge_count(r, r), state.edge_count(s, s), state.edge_count(r, s))
        } else {
            (state.edge_count(r, r), 0, 0)
        };
        delta += self.within_term(mrr - er - loops, nr2) - self.within_term(mrr, nr);
        delta += self.within_term(mss + es + loops, ns2) - self.within_term(mss, ns);
        delta += self.between_term(mrs + er - es, nr2 * ns2) - self.between_term(mrs, nr * ns);

        // Every other group pairs with both r and s. Where the edge count does
        // not change only the denominators move, and their ratio needs one log:
        // ln(1 + p x') - ln(1 + p x) = ln_1p(p (x' - x) / (1 + p x)).
        let p = self.p;
        for t in 0..k {
            if t == r || t == s {
                continue;
            }
            let nt = state.size(t) as f64;
            let et = tally.count(t);
            let (mrt, mst) = (state.edge_count(r, t), state.edge_count(s, t));
            let base_r = p * nr as f64 * nt;
            let base_s = p * ns as f64 * nt;
            let shift_r = (-p * nt / (1.0 + base_r)).ln_1p();
            let shift_s = (p * nt / (1.0 + base_s)).ln_1p();
            if et == 0 {
                delta -= (mrt + 1) as f64 * shift_r + (mst + 1) as f64 * shift_s;
            } else {
                let new_r = (base_r - p * nt).ln_1p();
                let new_s = (base_s + p * nt).ln_1p();
                delta += self.lnf(mrt - et) - self.lnf(mrt) + self.lnf(mst + et) - self.lnf(mst);
                delta -= (mrt + 1) as f64 * shift_r - et as f64 * new_r;
                delta -= (mst + 1) as f64 * shift_s + et as f64 * new_s;
            }
        }
        debug_assert!(mv.kind == MoveKind::ToNew || s < k);
        delta
    }
}

/// `ln P(A | g, k)` without the discarded overall constant.
pub fn log_marginal_likelihood(graph: &Graph, state: &PartitionState) -> f64 {
    Evaluator::new(graph).log_marginal(state)
}

/// `ln P(A | g', k') - ln P(A | g, k)` for the state reached by `mv`.
pub fn log_likelihood_ratio(graph: &Graph, state: &PartitionState, mv: &Move) -> f64 {
    let eval = Evaluator::new(graph);
    let mut tally = LinkTally::new();
    state.tally(graph, mv.node, &mut tally);
    eval.log_ratio(state, mv, &tally)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_is_zero() {
        // A graph whose only edge is a self-loop on node 0 still has p > 0, so
        // build the edgeless case directly.
        let g = Graph::from_edges(5, &[]).unwrap();
        for labels in [[0, 0, 0, 0, 0], [0, 1, 0, 2, 1], [0, 1, 2, 3, 4]] {
            let s = PartitionState::from_assignment(&g, &labels).unwrap();
            assert_eq!(log_marginal_likelihood(&g, &s), 0.0);
        }
    }

    #[test]
    fn triangle_single_group() {
        let g = Graph::load_edge_list_str("0 1\n1 2\n0 2\n").unwrap();
        let s = PartitionState::from_assignment(&g, &[0, 0, 0]).unwrap();
        let expected = (8748.0f64 / 10_321_920.0).ln();
        let got = log_marginal_likelihood(&g, &s);
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        assert!((got + 7.0732).abs() < 1e-4);
    }

    #[test]
    fn label_permutation_invariance() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 1)]).unwrap();
        let a = PartitionState::from_assignment(&g, &[0, 0, 1, 1, 2, 2]).unwrap();
        let b = PartitionState::from_assignment(&g, &[2, 2, 0, 0, 1, 1]).unwrap();
        let (la, lb) = (log_marginal_likelihood(&g, &a), log_marginal_likelihood(&g, &b));
        assert!((la - lb).abs() < 1e-12);
    }

    #[test]
    fn move_and_inverse_cancel() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (2, 2)]).unwrap();
        let mut s = PartitionState::from_assignment(&g, &[0, 0, 0, 1, 1, 1]).unwrap();
        let fwd = s.move_to_existing(2, 1).unwrap();
        let a = log_likelihood_ratio(&g, &s, &fwd);
        s.apply_move(&g, &fwd).unwrap();
        let back = s.move_to_existing(2, 0).unwrap();
        let b = log_likelihood_ratio(&g, &s, &back);
        assert!((a + b).abs() < 1e-9);
    }

    #[test]
    fn swapping_equivalent_nodes_is_neutral() {
        // Nodes 2 (group 0) and 5 (group 1) both have degree 2 with one edge
        // into each group.
        let edges = [(0, 1), (3, 4), (1, 4), (2, 0), (2, 3), (5, 0), (5, 3)];
        let g = Graph::from_edges(6, &edges).unwrap();
        let mut s = PartitionState::from_assignment(&g, &[0, 0, 0, 1, 1, 1]).unwrap();
        let before = log_marginal_likelihood(&g, &s);
        let mut total = 0.0;
        for (node, to) in [(2, 1), (5, 0)] {
            let mv = s.move_to_existing(node, to).unwrap();
            total += log_likelihood_ratio(&g, &s, &mv);
            s.apply_move(&g, &mv).unwrap();
        }
        assert!(total.abs() < 1e-9, "{total}");
        assert!((log_marginal_likelihood(&g, &s) - before).abs() < 1e-9);
    }
}
