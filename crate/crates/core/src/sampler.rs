//! Markov chain over `(g, k)`.
//!
//! Each step proposes one of two single-node moves:
//!
//! * with probability `1 - 1/(n-1)`, a type-1 move: pick an ordered pair of
//!   distinct groups `(r, s)` uniformly, then a uniform member of `r`, and move
//!   it to `s` (nothing happens when `k = 1`);
//! * otherwise a type-2 move: a uniform member of a uniformly chosen group is
//!   moved into a new group, which always receives label `k`.
//!
//! These proposal probabilities reproduce the prior ratio exactly, so a move is
//! accepted with probability `min(1, P(A|g',k') / P(A|g,k))`: the likelihood
//! ratio alone. The proposals realize the prior at `mu = 1`; for other values
//! of `mu` the acceptance ratio picks up a factor
//! `[mu (n-2) / (n-mu-1)]^(k'-k)`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::k_eff;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::likelihood::Evaluator;
use crate::partition::{LinkTally, Move, MoveKind, PartitionState};
use crate::prior::{log_prior_mu, mu_acceptance_correction, sample_partition_queueing};

/// Upper end of the interval from which the initial-state `mu` is drawn.
pub const INIT_MU_MAX: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialPartition {
    /// Draw from the queueing prior with `mu ~ U(0, min(100, n - 2))`.
    Random,
    /// Start from a given 0-based assignment.
    Given {
        #[serde(skip)]
        labels: Vec<usize>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct SamplerConfig {
    pub sweeps: usize,
    pub burn_in_sweeps: usize,
    pub chains: usize,
    pub mu: f64,
    pub seed: u64,
    pub record_map: bool,
    pub init: InitialPartition,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            sweeps: 2000,
            burn_in_sweeps: 1000,
            chains: 10,
            mu: 1.0,
            seed: 0,
            record_map: true,
            init: InitialPartition::Random,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self, graph: &Graph) -> Result<()> {
        let n = graph.n();
        if n < 3 {
            return Err(Error::TooSmall(n));
        }
        if self.burn_in_sweeps >= self.sweeps {
            return Err(Error::Config(format!(
                "burn-in ({}) must be smaller than the number of sweeps ({})",
                self.burn_in_sweeps, self.sweeps
            )));
        }
        if self.chains == 0 {
            return Err(Error::Config("at least one chain is required".into()));
        }
        if !(self.mu > 0.0 && self.mu < (n - 1) as f64) {
            return Err(Error::Config(format!("mu must lie in (0, {}), got {}", n - 1, self.mu)));
        }
        if let InitialPartition::Given { labels } = &self.init {
            PartitionState::from_assignment(graph, labels)?;
        }
        Ok(())
    }
}

/// Best state among the recorded samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapState {
    /// `ln P(A|g,k) + ln P(g,k)` without constants.
    pub log_posterior: f64,
    /// 0-based labels.
    pub labels: Vec<usize>,
    pub k: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainResult {
    pub chain: usize,
    /// `mu` used to draw the initial partition, if it was random.
    pub initial_mu: Option<f64>,
    pub initial_k: usize,
    pub burn_in_sweeps: usize,
    /// `k` after every sweep, burn-in included.
    pub k_trace: Vec<usize>,
    pub keff_trace: Vec<f64>,
    pub map: Option<MapState>,
    /// Accepted moves over all steps (no-op steps count as rejected).
    pub acceptance_rate: f64,
    pub steps: u64,
    pub steps_per_second: f64,
}

impl ChainResult {
    /// Post burn-in portion of the `k` trace.
    pub fn k_samples(&self) -> &[usize] {
        &self.k_trace[self.burn_in_sweeps.min(self.k_trace.len())..]
    }

    pub fn keff_samples(&self) -> &[f64] {
        &self.keff_trace[self.burn_in_sweeps.min(self.keff_trace.len())..]
    }
}

/// Random stream for one chain; independent of how chains are scheduled.
pub fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

/// Proposes a move, or `None` for the idle type-1 step at `k = 1`.
#[inline]
pub fn propose<R: Rng + ?Sized>(state: &PartitionState, rng: &mut R) -> Option<Move> {
    let n = state.n();
    let k = state.k();
    if rng.random_range(0..n - 1) != 0 {
        if k == 1 {
            return None;
        }
        let r = rng.random_range(0..k);
        let mut s = rng.random_range(0..k - 1);
        if s >= r {
            s += 1;
        }
        let node = state.random_member(r, rng);
        Some(Move {
            kind: MoveKind::ToExisting,
            node,
            from: r,
            to: s,
            empties_source: state.size(r) == 1,
            creates_group: false,
        })
    } else {
        // Of the (k+1)k ordered label pairs in 0..=k, exactly k+1 drain each
        // existing group, so the source group is uniform over 0..k.
        let source = rng.random_range(0..k);
        let node = state.random_member(source, rng);
        let empties = state.size(source) == 1;
        Some(Move {
            kind: MoveKind::ToNew,
            node,
            from: source,
            to: k,
            empties_source: empties,
            creates_group: !empties,
        })
    }
}

/// Metropolis acceptance on the likelihood ratio alone.
#[inline]
pub fn accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    if log_ratio >= 0.0 {
        return true;
    }
    // NaN and -inf fall through to rejection.
    log_ratio > f64::NEG_INFINITY && rng.random::<f64>() < log_ratio.exp()
}

/// `ln` of the probability of proposing `mv` in a state with `k` groups, in the
/// labelled form where a type-2 move also picks the label of the new group
/// (`k(k+1)` ordered pairs).
pub fn log_proposal_probability(n: usize, k: usize, kind: MoveKind, source_size: u64) -> f64 {
    let (n, kf, src) = (n as f64, k as f64, source_size as f64);
    match kind {
        MoveKind::ToExisting => (n - 2.0).ln() - (n - 1.0).ln() - (kf * (kf - 1.0)).ln() - src.ln(),
        MoveKind::ToNew => -(n - 1.0).ln() - (kf * (kf + 1.0)).ln() - src.ln(),
    }
}

/// `ln pi(fwd) - ln pi(bwd)` for `mv` applied to `state`, from the labelled
/// proposal probabilities of both directions.
pub fn log_proposal_ratio(state: &PartitionState, mv: &Move) -> f64 {
    let n = state.n();
    let k = state.k();
    let source = state.size(mv.from);
    let forward = log_proposal_probability(n, k, mv.kind, source);
    let k_after = mv.k_after(k);
    let backward = match (mv.kind, mv.empties_source) {
        // Back from s to r with r still present; s now holds n_s + 1 nodes.
        (MoveKind::ToExisting, false) => {
            log_proposal_probability(n, k_after, MoveKind::ToExisting, state.size(mv.to) + 1)
        }
        // r vanished: recreating it is a type-2 move out of s.
        (MoveKind::ToExisting, true) => {
            log_proposal_probability(n, k_after, MoveKind::ToNew, state.size(mv.to) + 1)
        }
        // The new singleton group is folded back into the source.
        (MoveKind::ToNew, false) => log_proposal_probability(n, k_after, MoveKind::ToExisting, 1),
        (MoveKind::ToNew, true) => log_proposal_probability(n, k_after, MoveKind::ToNew, 1),
    };
    forward - backward
}

/// Runs one chain. Deterministic given `(config.seed, chain)`.
pub fn run_chain(graph: &Graph, config: &SamplerConfig, chain: usize) -> Result<ChainResult> {
    config.validate(graph)?;
    let eval = Evaluator::new(graph);
    run_chain_with(graph, &eval, config, chain)
}

/// Runs every chain of `config` in parallel on the current rayon pool.
pub fn run_chains(graph: &Graph, config: &SamplerConfig) -> Result<Vec<ChainResult>> {
    config.validate(graph)?;
    let eval = Evaluator::new(graph);
    (0..config.chains)
        .into_par_iter()
        .map(|c| run_chain_with(graph, &eval, config, c))
        .collect()
}

fn run_chain_with(
    graph: &Graph,
    eval: &Evaluator,
    config: &SamplerConfig,
    chain: usize,
) -> Result<ChainResult> {
    let n = graph.n();
    let mut rng = chain_rng(config.seed, chain);

    let (labels, initial_mu) = match &config.init {
        InitialPartition::Random => {
            let upper = INIT_MU_MAX.min((n - 2) as f64);
            let mut mu = 0.0;
            while mu <= 0.0 {
                mu = rng.random_range(0.0..upper);
            }
            (sample_partition_queueing(n, mu, &mut rng)?.0, Some(mu))
        }
        InitialPartition::Given { labels } => (labels.clone(), None),
    };
    let mut state = PartitionState::from_assignment(graph, &labels)?;
    let initial_k = state.k();

    let correction = mu_acceptance_correction(n, config.mu);
    let mut tally = LinkTally::new();
    let mut k_trace = Vec::with_capacity(config.sweeps);
    let mut keff_trace = Vec::with_capacity(config.sweeps);
    let mut map: Option<MapState> = None;
    let mut accepted = 0u64;

    let started = Instant::now();
    for sweep in 0..config.sweeps {
        for _ in 0..n {
            let Some(mv) = propose(&state, &mut rng) else {
                continue;
            };
            if mv.is_identity() {
                accepted += 1;
                continue;
            }
            state.tally(graph, mv.node, &mut tally);
            let mut delta = eval.log_ratio(&state, &mv, &tally);
            if mv.empties_source != mv.creates_group {
                // k changes by one: +1 for a new group, -1 for an emptied one.
                delta += if mv.creates_group { correction } else { -correction };
            }
            if accept(delta, &mut rng) {
                state.apply_tallied(&mv, &tally);
                accepted += 1;
            }
        }
        k_trace.push(state.k());
        keff_trace.push(k_eff(state.sizes())?);
        if config.record_map && sweep >= config.burn_in_sweeps {
            let log_posterior = eval.log_marginal(&state) + log_prior_mu(n, config.mu, state.sizes());
            if map.as_ref().is_none_or(|m| log_posterior > m.log_posterior) {
                map = Some(MapState { log_posterior, labels: state.labels(), k: state.k() });
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let steps = (config.sweeps * n) as u64;

    Ok(ChainResult {
        chain,
        initial_mu,
        initial_k,
        burn_in_sweeps: config.burn_in_sweeps,
        k_trace,
        keff_trace,
        map,
        acceptance_rate: accepted as f64 / steps as f64,
        steps,
        steps_per_second: if elapsed > 0.0 { steps as f64 / elapsed } else { f64::INFINITY },
    })
}
