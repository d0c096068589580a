//! Estimation of the number of communities in a network.
//!
//! The observed network is fitted with the degree-corrected stochastic block
//! model. Node propensities and block rates are integrated out analytically,
//! leaving a marginal likelihood `P(A | g, k)` that depends only on group sizes,
//! group degree sums and the inter-group edge counts. Combined with a
//! queueing-process prior over partitions, the posterior over `(g, k)` is
//! sampled by a single-node Markov chain whose proposal distribution absorbs the
//! prior exactly, so that acceptance only involves the likelihood ratio.
//!
//! Modules:
//!
//! * [`graph`]: sparse multigraph ingestion.
//! * [`partition`]: group assignment plus incrementally maintained statistics.
//! * [`likelihood`]: marginal likelihood and its incremental ratio.
//! * [`prior`]: partition priors and the prior ratios used by the sampler.
//! * [`sampler`]: the Markov chain itself.
//! * [`generators`]: synthetic benchmark networks.
//! * [`analysis`]: posterior summaries.

pub mod analysis;
pub mod error;
pub mod generators;
pub mod graph;
pub mod likelihood;
pub mod log_factorial;
pub mod partition;
pub mod prior;
pub mod sampler;

pub use error::{Error, Result};
pub use graph::Graph;
pub use likelihood::{log_likelihood_ratio, log_marginal_likelihood};
pub use log_factorial::LogFactorialTable;
pub use partition::{Move, MoveKind, PartitionState};
pub use sampler::{run_chain, run_chains, ChainResult, InitialPartition, SamplerConfig};
