//! Priors over partitions.
//!
//! The working prior comes from a queueing process: visit the nodes in random
//! order, put the first in group 1, and let each later node open the next group
//! with probability `q = mu / (n - 1)` or otherwise join the group of the node
//! before it. No group is ever empty. At `mu = 1`, and dropping factors that
//! depend on neither `g` nor `k`,
//!
//! ```text
//! P(g, k) = (n - 2)^(-k) prod_r n_r!
//! ```
//!
//! The Dirichlet / non-parametric and non-empty priors are provided for
//! comparison and for the identities that tie them to the queueing prior.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::log_factorial::{ln_binomial, ln_factorial};
use crate::partition::{Move, MoveKind, PartitionState};

/// Parameters of the queueing-process prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorParams {
    n: usize,
    mu: f64,
}

impl PriorParams {
    pub fn new(n: usize, mu: f64) -> Result<Self> {
        if n < 2 || !(mu > 0.0 && mu < (n - 1) as f64) {
            return Err(Error::Parameter(format!(
                "mu must lie in (0, n - 1) = (0, {}), got {mu}",
                n.saturating_sub(1)
            )));
        }
        Ok(PriorParams { n, mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Probability that a node opens a new group.
    pub fn q(&self) -> f64 {
        self.mu / (self.n - 1) as f64
    }
}

fn sum_ln_factorials(sizes: &[u64]) -> f64 {
    sizes.iter().map(|&s| ln_factorial(s)).sum()
}

/// `ln[(n-2)^(-k) prod_r n_r!]` for the given group sizes.
pub fn log_prior_working_sizes(n: usize, sizes: &[u64]) -> Result<f64> {
    if n < 3 {
        return Err(Error::TooSmall(n));
    }
    Ok(-(sizes.len() as f64) * ((n - 2) as f64).ln() + sum_ln_factorials(sizes))
}

/// `ln[(mu / (n - mu - 1))^k prod_r n_r!]`, the queueing prior at general `mu`
/// without the factors that depend on neither `g` nor `k`. Equals the working
/// prior at `mu = 1`.
pub fn log_prior_mu(n: usize, mu: f64, sizes: &[u64]) -> f64 {
    sizes.len() as f64 * (mu.ln() - (n as f64 - mu - 1.0).ln()) + sum_ln_factorials(sizes)
}

/// Log of the extra acceptance factor per group created when sampling the
/// queueing prior at `mu` with proposals built for `mu = 1`. Zero at `mu = 1`.
pub fn mu_acceptance_correction(n: usize, mu: f64) -> f64 {
    mu.ln() + (n as f64 - 2.0).ln() - (n as f64 - mu - 1.0).ln()
}

/// Working prior `ln P(g, k)` of a state, up to a constant.
pub fn log_prior_working(state: &PartitionState) -> Result<f64> {
    log_prior_working_sizes(state.n(), state.sizes())
}

/// Sizes around a move, enough to evaluate the prior ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveContext {
    pub n: usize,
    pub kind: MoveKind,
    pub k_before: usize,
    pub k_after: usize,
    /// Size of the group the node leaves, before the move.
    pub source_size: u64,
    /// Size of the group the node joins, after the move.
    pub target_size_after: u64,
}

impl MoveContext {
    pub fn new(state: &PartitionState, mv: &Move) -> Self {
        let k = state.k();
        let target_size_after = match mv.kind {
            MoveKind::ToExisting => state.size(mv.to) + 1,
            MoveKind::ToNew => 1,
        };
        MoveContext {
            n: state.n(),
            kind: mv.kind,
            k_before: k,
            k_after: mv.k_after(k),
            source_size: state.size(mv.from),
            target_size_after,
        }
    }

    pub fn empties_source(&self) -> bool {
        self.source_size == 1
    }
}

/// `ln[P(g', k') / P(g, k)]` under the working prior, by case.
pub fn log_prior_ratio(ctx: &MoveContext) -> f64 {
    let n2 = (ctx.n - 2) as f64;
    match (ctx.kind, ctx.empties_source()) {
        // Sizes n_r -> n_r - 1 and n_s -> n_s': ratio n_s' / n_r.
        (MoveKind::ToExisting, false) => {
            (ctx.target_size_after as f64).ln() - (ctx.source_size as f64).ln()
        }
        // Group r disappears: (n - 2) n_s'.
        (MoveKind::ToExisting, true) => n2.ln() + (ctx.target_size_after as f64).ln(),
        // Reverse of the previous case, with the source playing the receiving
        // group of the reverse move.
        (MoveKind::ToNew, false) => -(n2.ln() + (ctx.source_size as f64).ln()),
        // The partition does not change.
        (MoveKind::ToNew, true) => 0.0,
    }
}

/// Draws a partition from the queueing process. Returns 0-based labels and `k`.
pub fn sample_partition_queueing<R: Rng + ?Sized>(
    n: usize,
    mu: f64,
    rng: &mut R,
) -> Result<(Vec<usize>, usize)> {
    let q = PriorParams::new(n, mu)?.q();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut labels = vec![0usize; n];
    let mut group = 0usize;
    for &node in &order[1..] {
        if rng.random::<f64>() < q {
            group += 1;
        }
        labels[node] = group;
    }
    Ok((labels, group + 1))
}

/// Prior probability of `k` groups: binomial in the number of new groups.
pub fn prior_k_pmf(n: usize, q: f64, k: usize) -> f64 {
    log_prior_k_pmf(n, q, k).exp()
}

/// `ln` of [`prior_k_pmf`]; `-inf` outside `1..=n`.
pub fn log_prior_k_pmf(n: usize, q: f64, k: usize) -> f64 {
    if n == 0 || k == 0 || k > n {
        return f64::NEG_INFINITY;
    }
    let (n1, k1) = ((n - 1) as u64, (k - 1) as u64);
    let mut log_p = ln_binomial(n1, k1);
    if k1 > 0 {
        log_p += k1 as f64 * q.ln();
    }
    if n1 > k1 {
        log_p += (n1 - k1) as f64 * (-q).ln_1p();
    }
    log_p
}

fn check_sizes(n: usize, k: usize, sizes: &[u64]) -> Result<()> {
    if sizes.len() != k || sizes.iter().sum::<u64>() != n as u64 {
        return Err(Error::Parameter(format!(
            "sizes {sizes:?} do not describe {k} groups over {n} nodes"
        )));
    }
    Ok(())
}

/// Uniform-over-sizes prior `ln[(k-1)! prod_r n_r! / (n+k-1)!]`. Groups may be empty.
pub fn log_prior_nonparametric(n: usize, k: usize, sizes: &[u64]) -> Result<f64> {
    check_sizes(n, k, sizes)?;
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    Ok(ln_factorial((k - 1) as u64) + sum_ln_factorials(sizes) - ln_factorial((n + k - 1) as u64))
}

/// Non-empty analogue `ln[prod_r n_r! / (C(n-1, k-1) n!)]`.
pub fn log_prior_nonempty(n: usize, k: usize, sizes: &[u64]) -> Result<f64> {
    check_sizes(n, k, sizes)?;
    if sizes.contains(&0) {
        return Err(Error::Parameter("non-empty prior requires every size >= 1".into()));
    }
    Ok(sum_ln_factorials(sizes)
        - ln_binomial((n - 1) as u64, (k - 1) as u64)
        - ln_factorial(n as u64))
}

/// Exact joint law of the queueing process,
/// `ln[q^(k-1) (1-q)^(n-k) prod_r n_r! / n!]`.
pub fn log_prior_queueing(n: usize, q: f64, sizes: &[u64]) -> Result<f64> {
    let k = sizes.len();
    check_sizes(n, k, sizes)?;
    if sizes.contains(&0) {
        return Err(Error::Parameter("queueing prior never produces empty groups".into()));
    }
    let mut value = sum_ln_factorials(sizes) - ln_factorial(n as u64);
    if k > 1 {
        value += (k - 1) as f64 * q.ln();
    }
    if n > k {
        value += (n - k) as f64 * (-q).ln_1p();
    }
    Ok(value)
}
