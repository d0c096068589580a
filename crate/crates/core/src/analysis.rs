//! Posterior summaries built from chain output.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::PartitionState;
use crate::sampler::{ChainResult, MapState};

/// Default bin width of the `k_eff` histogram.
pub const KEFF_BIN_WIDTH: f64 = 0.1;

/// Effective number of groups `exp(S)`, with `S` the entropy of the group-size
/// distribution.
pub fn k_eff(sizes: &[u64]) -> Result<f64> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::Parameter("k_eff needs at least one non-empty group".into()));
    }
    if sizes.iter().all(|&s| s == sizes[0]) {
        return Ok(sizes.len() as f64);
    }
    let n: u64 = sizes.iter().sum();
    let n = n as f64;
    let entropy: f64 = sizes
        .iter()
        .map(|&s| {
            let f = s as f64 / n;
            -f * f.ln()
        })
        .sum();
    Ok(entropy.exp().clamp(1.0, sizes.len() as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeffHistogram {
    pub bin_width: f64,
    /// Left edge of the first bin.
    pub start: f64,
    pub counts: Vec<u64>,
}

impl KeffHistogram {
    pub fn densities(&self) -> Vec<f64> {
        let total: u64 = self.counts.iter().sum();
        self.counts
            .iter()
            .map(|&c| c as f64 / (total as f64 * self.bin_width))
            .collect()
    }
}

/// Bins `values` with fixed `width` over `[1, upper]`, where `upper` is the
/// largest `k` observed.
pub fn keff_histogram(values: &[f64], upper: usize, width: f64) -> KeffHistogram {
    let bins = (((upper.max(1) - 1) as f64 / width + 1e-9).floor() as usize) + 1;
    let mut counts = vec![0u64; bins];
    for &v in values {
        let index = (((v - 1.0) / width + 1e-9).floor().max(0.0) as usize).min(bins - 1);
        counts[index] += 1;
    }
    KeffHistogram { bin_width: width, start: 1.0, counts }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MetaEdge {
    /// 1-based group labels, `r <= s`.
    pub r: usize,
    pub s: usize,
    pub weight: u64,
}

/// Condensed network of groups.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaNetwork {
    pub sizes: Vec<u64>,
    pub edges: Vec<MetaEdge>,
}

/// One meta-node per group; an edge for every pair (including `r == s`) with
/// at least one edge between them.
pub fn meta_network(state: &PartitionState) -> MetaNetwork {
    let k = state.k();
    let mut edges = Vec::new();
    for r in 0..k {
        for s in r..k {
            let weight = state.edge_count(r, s);
            if weight > 0 {
                edges.push(MetaEdge { r: r + 1, s: s + 1, weight });
            }
        }
    }
    MetaNetwork { sizes: state.sizes().to_vec(), edges }
}

/// Point estimate of the block rates: `m_rs / (n_r n_s)` off the diagonal and
/// `2 m_rr / n_r^2` on it.
pub fn omega_hat(state: &PartitionState) -> Vec<Vec<f64>> {
    let k = state.k();
    (0..k)
        .map(|r| {
            (0..k)
                .map(|s| {
                    let (nr, ns) = (state.size(r) as f64, state.size(s) as f64);
                    let m = state.edge_count(r, s) as f64;
                    if r == s {
                        2.0 * m / (nr * nr)
                    } else {
                        m / (nr * ns)
                    }
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapSummary {
    pub chain: usize,
    pub log_posterior: f64,
    pub k: usize,
    /// 1-based labels.
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStats {
    pub chain: usize,
    pub initial_mu: Option<f64>,
    pub initial_k: usize,
    pub k_mode: usize,
    pub acceptance_rate: f64,
    pub steps_per_second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorSummary {
    /// Posterior probability of each observed `k`, pooled over chains.
    pub k_histogram: BTreeMap<usize, f64>,
    pub k_mode: usize,
    pub keff_histogram: KeffHistogram,
    pub samples: usize,
    pub map: Option<MapSummary>,
    pub omega_hat: Option<Vec<Vec<f64>>>,
    pub meta_network: Option<MetaNetwork>,
    pub per_chain: Vec<ChainStats>,
}

#[derive(Debug, Clone, Copy)]
pub struct SummaryOptions {
    pub keff_bin_width: f64,
    /// Derive the block-rate matrix and meta-network from the MAP partition.
    pub map_products: bool,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        SummaryOptions { keff_bin_width: KEFF_BIN_WIDTH, map_products: true }
    }
}

/// Most frequent value; ties go to the smaller `k`.
pub fn mode(counts: &BTreeMap<usize, u64>) -> Option<usize> {
    let mut best: Option<(usize, u64)> = None;
    for (&k, &c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((k, c));
        }
    }
    best.map(|(k, _)| k)
}

fn counts_of(samples: &[usize]) -> BTreeMap<usize, u64> {
    let mut counts = BTreeMap::new();
    for &k in samples {
        *counts.entry(k).or_insert(0u64) += 1;
    }
    counts
}

/// Pools the post burn-in samples of every chain.
pub fn summarize(
    graph: &Graph,
    chains: &[ChainResult],
    options: &SummaryOptions,
) -> Result<PosteriorSummary> {
    if chains.is_empty() {
        return Err(Error::Config("no chains to summarize".into()));
    }
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    let mut keff = Vec::new();
    let mut per_chain = Vec::with_capacity(chains.len());
    for c in chains {
        let own = counts_of(c.k_samples());
        for (&k, &n) in &own {
            *counts.entry(k).or_insert(0) += n;
        }
        keff.extend_from_slice(c.keff_samples());
        per_chain.push(ChainStats {
            chain: c.chain,
            initial_mu: c.initial_mu,
            initial_k: c.initial_k,
            k_mode: mode(&own).unwrap_or(0),
            acceptance_rate: c.acceptance_rate,
            steps_per_second: c.steps_per_second,
        });
    }
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(Error::Config("every sample falls inside the burn-in period".into()));
    }
    let k_histogram = counts.iter().map(|(&k, &c)| (k, c as f64 / total as f64)).collect();
    let k_mode = mode(&counts).expect("non-empty histogram");
    let upper = *counts.keys().next_back().unwrap();
    let keff_histogram = keff_histogram(&keff, upper, options.keff_bin_width);

    let best: Option<(usize, &MapState)> = chains
        .iter()
        .filter_map(|c| c.map.as_ref().map(|m| (c.chain, m)))
        .fold(None, |acc, (chain, m)| match acc {
            Some((_, b)) if b.log_posterior >= m.log_posterior => acc,
            _ => Some((chain, m)),
        });

    let (mut omega, mut meta) = (None, None);
    let map = match best {
        Some((chain, m)) => {
            if options.map_products {
                let state = PartitionState::from_assignment(graph, &m.labels)?;
                omega = Some(omega_hat(&state));
                meta = Some(meta_network(&state));
            }
            Some(MapSummary {
                chain,
                log_posterior: m.log_posterior,
                k: m.k,
                labels: m.labels.iter().map(|&l| l + 1).collect(),
            })
        }
        None => None,
    };

    Ok(PosteriorSummary {
        k_histogram,
        k_mode,
        keff_histogram,
        samples: total as usize,
        map,
        omega_hat: omega,
        meta_network: meta,
        per_chain,
    })
}
