#![allow(dead_code)]

use std::collections::BTreeMap;

use kcount::prior::log_prior_mu;
use kcount::Graph;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::ln_gamma;

/// Marginal likelihood evaluated straight from the edge list with `ln_gamma`,
/// sharing no code with the library.
pub fn oracle_log_likelihood(graph: &Graph, labels: &[usize]) -> f64 {
    let n = graph.n();
    let k = labels.iter().max().unwrap() + 1;
    let mut sizes = vec![0f64; k];
    let mut kappa = vec![0f64; k];
    let mut m = vec![vec![0f64; k]; k];
    let mut total = 0f64;
    for &g in labels {
        sizes[g] += 1.0;
    }
    for (u, v) in graph.edges() {
        let (r, s) = (labels[u], labels[v]);
        kappa[r] += 1.0;
        kappa[s] += 1.0;
        total += 1.0;
        if r == s {
            m[r][r] += 1.0;
        } else {
            m[r.min(s)][r.max(s)] += 1.0;
        }
    }
    let p = 2.0 * total / (n * n) as f64;
    let mut value = 0.0;
    for r in 0..k {
        let nr = sizes[r];
        value += kappa[r] * nr.ln() + ln_gamma(nr) - ln_gamma(nr + kappa[r]);
        value += ln_gamma(m[r][r] + 1.0) - (m[r][r] + 1.0) * (p * nr * nr / 2.0).ln_1p();
        for s in r + 1..k {
            value += ln_gamma(m[r][s] + 1.0) - (m[r][s] + 1.0) * (p * nr * sizes[s]).ln_1p();
        }
    }
    value
}

/// Every set partition of `0..n` as a restricted growth string.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for label in 0..=max + 1 {
            prefix.push(label);
            extend(prefix, max.max(label), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        let mut prefix = vec![0];
        extend(&mut prefix, 0, n, &mut out);
    }
    out
}

pub fn sizes_of(labels: &[usize]) -> Vec<u64> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0u64; k];
    for &g in labels {
        sizes[g] += 1;
    }
    sizes
}

fn ln_factorial(k: usize) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

fn normalize_log(weights: Vec<(Vec<usize>, f64)>) -> Vec<(Vec<usize>, f64)> {
    let top = weights.iter().map(|w| w.1).fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = weights.iter().map(|w| (w.1 - top).exp()).sum();
    weights.into_iter().map(|(g, w)| (g, (w - top).exp() / z)).collect()
}

/// Exact posterior over set partitions. A set partition with `k` blocks stands
/// for `k!` labelled assignments, each carrying the same prior and likelihood.
pub fn exact_partition_posterior(graph: &Graph, mu: f64) -> Vec<(Vec<usize>, f64)> {
    let n = graph.n();
    let weights = set_partitions(n)
        .into_iter()
        .map(|g| {
            let sizes = sizes_of(&g);
            let k = sizes.len();
            let w = ln_factorial(k) + log_prior_mu(n, mu, &sizes) + oracle_log_likelihood(graph, &g);
            (g, w)
        })
        .collect();
    normalize_log(weights)
}

/// Exact posterior over set partitions for an arbitrary log prior on labelled
/// assignments given `(n, sizes)`.
pub fn exact_partition_posterior_with(
    graph: &Graph,
    log_prior: impl Fn(usize, &[u64]) -> f64,
) -> Vec<(Vec<usize>, f64)> {
    let n = graph.n();
    let weights = set_partitions(n)
        .into_iter()
        .map(|g| {
            let sizes = sizes_of(&g);
            let w = ln_factorial(sizes.len()) + log_prior(n, &sizes) + oracle_log_likelihood(graph, &g);
            (g, w)
        })
        .collect();
    normalize_log(weights)
}

pub fn k_marginal(posterior: &[(Vec<usize>, f64)]) -> BTreeMap<usize, f64> {
    let mut out = BTreeMap::new();
    for (g, p) in posterior {
        *out.entry(g.iter().max().unwrap() + 1).or_insert(0.0) += p;
    }
    out
}

pub fn total_variation<K: Ord + Clone>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    let mut keys: Vec<K> = a.keys().cloned().collect();
    keys.extend(b.keys().cloned());
    keys.sort();
    keys.dedup();
    keys.iter()
        .map(|key| (a.get(key).copied().unwrap_or(0.0) - b.get(key).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
        / 2.0
}

pub fn empirical<K: Ord + Clone>(samples: impl IntoIterator<Item = K>) -> BTreeMap<K, f64> {
    let mut counts: BTreeMap<K, f64> = BTreeMap::new();
    let mut total = 0.0;
    for s in samples {
        *counts.entry(s).or_insert(0.0) += 1.0;
        total += 1.0;
    }
    for v in counts.values_mut() {
        *v /= total;
    }
    counts
}

/// Canonical restricted-growth form of a labelling.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// Pearson chi-square p-value of `observed` counts against `expected`
/// probabilities; cells with expectation below 5 are pooled.
pub fn chi_square_p(observed: &[u64], expected: &[f64]) -> f64 {
    let total: u64 = observed.iter().sum();
    let total = total as f64;
    let mut stat = 0.0;
    let mut cells = 0usize;
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        let e = e * total;
        if e < 5.0 {
            pool_o += o as f64;
            pool_e += e;
            continue;
        }
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    if pool_e > 0.0 {
        stat += (pool_o - pool_e).powi(2) / pool_e.max(1e-300);
        cells += 1;
    }
    let dof = (cells.max(2) - 1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

/// Random multigraph with `m` edges; roughly one in ten is a self-loop.
pub fn random_multigraph<R: Rng>(n: usize, m: usize, rng: &mut R) -> Graph {
    let edges: Vec<(usize, usize)> = (0..m)
        .map(|_| {
            let u = rng.random_range(0..n);
            let v = if rng.random::<f64>() < 0.1 { u } else { rng.random_range(0..n) };
            (u, v)
        })
        .collect();
    Graph::from_edges(n, &edges).unwrap()
}

/// Random labelling of `n` nodes into at most `k_max` contiguous groups.
pub fn random_labels<R: Rng>(n: usize, k_max: usize, rng: &mut R) -> Vec<usize> {
    let raw: Vec<usize> = (0..n).map(|_| rng.random_range(0..k_max.max(1))).collect();
    canonical(&raw)
}
