//! Synthetic networks with planted groups.
//!
//! All generators draw from the (degree-corrected) stochastic block model: the
//! number of edges between nodes `i != j` is Poisson with mean
//! `theta_i theta_j omega_{g_i g_j}` and the number of self-loops at `i` is
//! Poisson with mean `theta_i^2 omega_{g_i g_i} / 2`.

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Block model parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SbmSpec {
    pub sizes: Vec<usize>,
    /// Symmetric `k x k` matrix of rates.
    pub omega: Vec<Vec<f64>>,
    /// Node propensities with mean 1 in every group; `None` means all ones.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
}

fn equal_sizes(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|r| n / k + usize::from(r < n % k)).collect()
}

impl SbmSpec {
    /// `k` groups of (near) equal size, mean degree `c`, and a fraction
    /// `in_fraction` of every node's expected edges inside its own group.
    pub fn planted(n: usize, k: usize, c: f64, in_fraction: f64) -> Result<Self> {
        if k == 0 || n < k {
            return Err(Error::Infeasible(format!("cannot split {n} nodes into {k} groups")));
        }
        if c.is_nan() || c < 0.0 || !(0.0..=1.0).contains(&in_fraction) {
            return Err(Error::Infeasible(format!(
                "need c >= 0 and an in-group fraction in [0, 1], got c = {c}, fraction = {in_fraction}"
            )));
        }
        let size = n as f64 / k as f64;
        let w_in = c * in_fraction / size;
        let w_out = if k > 1 { c * (1.0 - in_fraction) / (n as f64 - size) } else { 0.0 };
        Self::two_level(equal_sizes(n, k), w_in, w_out)
    }

    /// `k` groups of `group_size` nodes; each node expects `c_in` edges inside
    /// its group and `c_out` edges to the rest of the network.
    pub fn fixed_size(group_size: usize, k: usize, c_in: f64, c_out: f64) -> Result<Self> {
        if k == 0 || group_size == 0 || c_in.is_nan() || c_in < 0.0 || c_out.is_nan() || c_out < 0.0 {
            return Err(Error::Infeasible("fixed-size spec needs k, size > 0 and rates >= 0".into()));
        }
        let s = group_size as f64;
        let w_out = if k > 1 { c_out / (s * (k - 1) as f64) } else { 0.0 };
        Self::two_level(vec![group_size; k], c_in / s, w_out)
    }

    fn two_level(sizes: Vec<usize>, w_in: f64, w_out: f64) -> Result<Self> {
        let k = sizes.len();
        let omega = (0..k)
            .map(|r| (0..k).map(|s| if r == s { w_in } else { w_out }).collect())
            .collect();
        let spec = SbmSpec { sizes, omega, theta: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    /// Planted 0-based labels: group `r` holds a contiguous block of nodes.
    pub fn ground_truth(&self) -> Vec<usize> {
        self.sizes.iter().enumerate().flat_map(|(r, &s)| std::iter::repeat_n(r, s)).collect()
    }

    /// `sum_{r<s} n_r n_s omega_rs + sum_r n_r^2 omega_rr / 2`.
    pub fn expected_edges(&self) -> f64 {
        let k = self.k();
        let mut total = 0.0;
        for r in 0..k {
            let nr = self.sizes[r] as f64;
            total += nr * nr * self.omega[r][r] / 2.0;
            for s in r + 1..k {
                total += nr * self.sizes[s] as f64 * self.omega[r][s];
            }
        }
        total
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if k == 0 || self.sizes.contains(&0) {
            return Err(Error::Infeasible("every group needs at least one node".into()));
        }
        if self.omega.len() != k || self.omega.iter().any(|row| row.len() != k) {
            return Err(Error::Infeasible(format!("omega must be {k} x {k}")));
        }
        for r in 0..k {
            for s in 0..k {
                let w = self.omega[r][s];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::Infeasible(format!("omega[{r}][{s}] = {w} is not a valid rate")));
                }
                if (w - self.omega[s][r]).abs() > 1e-12 * w.abs().max(1.0) {
                    return Err(Error::Infeasible("omega must be symmetric".into()));
                }
            }
        }
        if let Some(theta) = &self.theta {
            if theta.len() != self.n() {
                return Err(Error::Infeasible(format!(
                    "{} propensities for {} nodes",
                    theta.len(),
                    self.n()
                )));
            }
            let mut start = 0;
            for &size in &self.sizes {
                let block = &theta[start..start + size];
                if block.iter().any(|&t| t.is_nan() || t < 0.0) {
                    return Err(Error::Infeasible("propensities must be non-negative".into()));
                }
                let mean = block.iter().sum::<f64>() / size as f64;
                if (mean - 1.0).abs() > 1e-12 {
                    return Err(Error::Infeasible(format!("group propensity mean {mean} != 1")));
                }
                start += size;
            }
        }
        Ok(())
    }
}

/// Rescales `values` so that each group's mean is 1.
pub fn normalize_per_group(values: &mut [f64], sizes: &[usize]) {
    let mut start = 0;
    for &size in sizes {
        let block = &mut values[start..start + size];
        let mean = block.iter().sum::<f64>() / size as f64;
        for v in block.iter_mut() {
            *v /= mean;
        }
        start += size;
    }
}

/// Draws a network and returns it with the planted 0-based labels.
pub fn generate_sbm<R: Rng + ?Sized>(spec: &SbmSpec, rng: &mut R) -> Result<(Graph, Vec<usize>)> {
    spec.validate()?;
    let k = spec.k();
    let mut offsets = Vec::with_capacity(k);
    let mut start = 0;
    for &s in &spec.sizes {
        offsets.push(start);
        start += s;
    }

    let pickers: Option<Vec<WeightedAliasIndex<f64>>> = match &spec.theta {
        Some(theta) => Some(
            (0..k)
                .map(|r| {
                    let block = theta[offsets[r]..offsets[r] + spec.sizes[r]].to_vec();
                    WeightedAliasIndex::new(block)
                        .map_err(|e| Error::Infeasible(format!("propensities of group {}: {e}", r + 1)))
                })
                .collect::<Result<_>>()?,
        ),
        None => None,
    };
    let pick = |r: usize, rng: &mut R| -> usize {
        offsets[r]
            + match &pickers {
                Some(p) => p[r].sample(rng),
                None => rng.random_range(0..spec.sizes[r]),
            }
    };

    // Per block pair the total edge count is Poisson with the summed mean, and
    // given the total the endpoints are independent draws weighted by theta.
    // This is the same law as independent Poisson counts for every node pair.
    let mut edges = Vec::new();
    for r in 0..k {
        for s in r..k {
            let (nr, ns) = (spec.sizes[r] as f64, spec.sizes[s] as f64);
            let mean = if r == s {
                spec.omega[r][r] * nr * nr / 2.0
            } else {
                spec.omega[r][s] * nr * ns
            };
            if mean <= 0.0 {
                continue;
            }
            let count = Poisson::new(mean)
                .map_err(|e| Error::Infeasible(format!("block ({}, {}): {e}", r + 1, s + 1)))?
                .sample(rng) as u64;
            for _ in 0..count {
                let u = pick(r, rng);
                let v = pick(s, rng);
                edges.push((u, v));
            }
        }
    }
    let graph = Graph::from_edges(spec.n(), &edges)?;
    Ok((graph, spec.ground_truth()))
}

/// Equal groups at mean degree `c` with mixing placed relative to the
/// detectability threshold: `x = (c_in - c_out) / (k sqrt(c))`, so the
/// threshold `|c_in - c_out| = k sqrt(c)` sits at `|x| = 1` for every `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectabilitySpec {
    pub n: usize,
    pub k: usize,
    pub c: f64,
    pub x: f64,
}

impl DetectabilitySpec {
    /// `(c_in, c_out)` with `c = [c_in + (k-1) c_out] / k`.
    pub fn rates(&self) -> Result<(f64, f64)> {
        if self.k < 2 || self.n < self.k || self.c.is_nan() || self.c <= 0.0 || !self.x.is_finite() {
            return Err(Error::Infeasible(format!("invalid detectability spec {self:?}")));
        }
        let root = self.c.sqrt();
        let c_out = self.c - self.x * root;
        let c_in = self.c + (self.k - 1) as f64 * self.x * root;
        let tol = 1e-9 * self.c;
        if c_out < -tol || c_in < -tol {
            return Err(Error::Infeasible(format!(
                "x = {} gives negative rates (c_in = {c_in}, c_out = {c_out}); x must lie in [{}, {}]",
                self.x,
                -root / (self.k - 1) as f64,
                root
            )));
        }
        Ok((c_in.max(0.0), c_out.max(0.0)))
    }

    pub fn to_sbm(&self) -> Result<SbmSpec> {
        let (c_in, c_out) = self.rates()?;
        let n = self.n as f64;
        SbmSpec::two_level(equal_sizes(self.n, self.k), c_in / n, c_out / n)
    }
}

/// Reorders rows of the rate matrix: `omega'_rs = omega_{sigma(r) s}`.
///
/// Moves diagonal entries off the diagonal, producing mixed assortative and
/// disassortative structure. The result must stay symmetric, which for a
/// two-level matrix means `sigma` has to be an involution.
pub fn permute_mixing(spec: &SbmSpec, sigma: &[usize]) -> Result<SbmSpec> {
    let k = spec.k();
    let mut seen = vec![false; k];
    if sigma.len() != k || sigma.iter().any(|&s| s >= k || std::mem::replace(&mut seen[s], true)) {
        return Err(Error::Infeasible(format!("{sigma:?} is not a permutation of 0..{k}")));
    }
    let omega: Vec<Vec<f64>> = (0..k).map(|r| spec.omega[sigma[r]].clone()).collect();
    let out = SbmSpec { sizes: spec.sizes.clone(), omega, theta: spec.theta.clone() };
    out.validate()?;
    Ok(out)
}

/// Default involution for mixed structure: swap groups `(0, 1)`, `(2, 3)`, ...
/// for the first `max(1, k / 4)` pairs.
pub fn default_mixing_permutation(k: usize) -> Vec<usize> {
    let mut sigma: Vec<usize> = (0..k).collect();
    for pair in 0..(k / 4).max(1) {
        let (a, b) = (2 * pair, 2 * pair + 1);
        if b < k {
            sigma.swap(a, b);
        }
    }
    sigma
}

/// Degree-corrected block model with power-law group sizes and degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawSpec {
    pub n: usize,
    pub min_size: usize,
    /// Defaults to five times `min_size`.
    pub max_size: usize,
    pub size_exponent: f64,
    pub degree_exponent: f64,
    pub mean_degree: f64,
    pub max_degree: f64,
    /// Fraction of each node's expected degree that leaves its group.
    pub mixing: f64,
}

impl PowerLawSpec {
    pub fn new(n: usize, min_size: usize, degree_exponent: f64, mixing: f64) -> Self {
        PowerLawSpec {
            n,
            min_size,
            max_size: 5 * min_size,
            size_exponent: 1.0,
            degree_exponent,
            mean_degree: 20.0,
            max_degree: 50.0,
            mixing,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Infeasible(what.to_owned()));
        if self.min_size == 0 || self.max_size < self.min_size {
            return bad("group sizes need 1 <= min_size <= max_size");
        }
        if self.n < self.min_size {
            return bad("network smaller than the minimum group size");
        }
        if !(0.0..1.0).contains(&self.mixing) {
            return bad("mixing fraction must lie in [0, 1)");
        }
        if !(self.mean_degree > 0.0 && self.mean_degree < self.max_degree) {
            return bad("need 0 < mean degree < max degree");
        }
        if !self.degree_exponent.is_finite() || !self.size_exponent.is_finite() {
            return bad("exponents must be finite");
        }
        Ok(())
    }
}

/// Continuous power law `x^-exponent` truncated to `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedPowerLaw {
    pub lo: f64,
    pub hi: f64,
    pub exponent: f64,
}

impl TruncatedPowerLaw {
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return 1.0;
        }
        let a = 1.0 - self.exponent;
        if a.abs() < 1e-12 {
            (x / self.lo).ln() / (self.hi / self.lo).ln()
        } else {
            (x.powf(a) - self.lo.powf(a)) / (self.hi.powf(a) - self.lo.powf(a))
        }
    }

    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let a = 1.0 - self.exponent;
        if a.abs() < 1e-12 {
            self.lo * (self.hi / self.lo).powf(u)
        } else {
            let (l, h) = (self.lo.powf(a), self.hi.powf(a));
            (l + u * (h - l)).powf(1.0 / a)
        }
    }

    pub fn mean(&self) -> f64 {
        let (lo, hi, t) = (self.lo, self.hi, self.exponent);
        let integral = |p: f64| {
            // \int_lo^hi x^p dx
            if (p + 1.0).abs() < 1e-12 {
                (hi / lo).ln()
            } else {
                (hi.powf(p + 1.0) - lo.powf(p + 1.0)) / (p + 1.0)
            }
        };
        integral(1.0 - t) / integral(-t)
    }

    /// Lower cut-off giving the requested mean for fixed `hi` and exponent.
    pub fn with_mean(mean: f64, hi: f64, exponent: f64) -> Result<Self> {
        if !(mean > 0.0 && mean < hi) {
            return Err(Error::Infeasible(format!("mean degree {mean} must lie in (0, {hi})")));
        }
        let mut lo_bound = 1e-9 * mean;
        let mut hi_bound = mean;
        let at = |lo: f64| TruncatedPowerLaw { lo, hi, exponent }.mean();
        if at(lo_bound) > mean {
            return Err(Error::Infeasible(format!(
                "mean degree {mean} unreachable with max {hi} and exponent {exponent}"
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo_bound + hi_bound);
            if at(mid) < mean {
                lo_bound = mid;
            } else {
                hi_bound = mid;
            }
        }
        Ok(TruncatedPowerLaw { lo: 0.5 * (lo_bound + hi_bound), hi, exponent })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse_cdf(rng.random::<f64>())
    }
}

/// Group sizes from a discrete power law on `[min_size, max_size]`, drawn until
/// they cover `n`; the last group is cut to the remainder.
pub fn power_law_sizes<R: Rng + ?Sized>(spec: &PowerLawSpec, rng: &mut R) -> Result<Vec<usize>> {
    let weights: Vec<f64> =
        (spec.min_size..=spec.max_size).map(|s| (s as f64).powf(-spec.size_exponent)).collect();
    let dist = WeightedAliasIndex::new(weights).map_err(|e| Error::Infeasible(e.to_string()))?;
    let mut sizes = Vec::new();
    let mut total = 0;
    while total < spec.n {
        let s = (spec.min_size + dist.sample(rng)).min(spec.n - total);
        sizes.push(s);
        total += s;
    }
    Ok(sizes)
}

/// Symmetric between-group rates `a_r a_s` with `a_r sum_{s != r} a_s = target_r`.
fn between_group_factors(targets: &[f64]) -> Result<Vec<f64>> {
    if targets.iter().all(|&t| t == 0.0) {
        return Ok(vec![0.0; targets.len()]);
    }
    // For a given total A, a_r(A - a_r) = t_r gives a_r(A) as the smaller root;
    // the consistent A solves sum_r a_r(A) = A, found by bisection.
    let factors = |total: f64| -> Vec<f64> {
        targets
            .iter()
            .map(|&t| 0.5 * (total - (total * total - 4.0 * t).max(0.0).sqrt()))
            .collect()
    };
    let excess = |total: f64| factors(total).iter().sum::<f64>() - total;
    let t_max = targets.iter().cloned().fold(0.0, f64::max);
    let mut lo = 2.0 * t_max.sqrt();
    if excess(lo) < 0.0 {
        return Err(Error::Infeasible(
            "one group carries more than half of all between-group edges".into(),
        ));
    }
    let mut hi = lo.max(targets.iter().sum::<f64>().sqrt()) * 2.0 + 1.0;
    while excess(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(factors(0.5 * (lo + hi)))
}

/// Builds the block-model spec of a power-law network: sizes, per-group
/// normalized propensities, and rates giving each node a fraction
/// `1 - mixing` of its expected degree inside its group.
pub fn power_law_spec<R: Rng + ?Sized>(spec: &PowerLawSpec, rng: &mut R) -> Result<SbmSpec> {
    spec.validate()?;
    let sizes = power_law_sizes(spec, rng)?;
    let law = TruncatedPowerLaw::with_mean(spec.mean_degree, spec.max_degree, spec.degree_exponent)?;
    let mut degrees: Vec<f64> = (0..spec.n).map(|_| law.sample(rng)).collect();

    let k = sizes.len();
    let mut group_mean = Vec::with_capacity(k);
    let mut start = 0;
    for &s in &sizes {
        group_mean.push(degrees[start..start + s].iter().sum::<f64>() / s as f64);
        start += s;
    }
    normalize_per_group(&mut degrees, &sizes);

    let totals: Vec<f64> = sizes.iter().zip(&group_mean).map(|(&s, &d)| s as f64 * d).collect();
    let out_targets: Vec<f64> = totals.iter().map(|&t| spec.mixing * t).collect();
    let a = if k == 1 {
        if spec.mixing > 0.0 {
            return Err(Error::Infeasible("a single group cannot have between-group edges".into()));
        }
        vec![0.0]
    } else {
        between_group_factors(&out_targets)?
    };
    let omega = (0..k)
        .map(|r| {
            (0..k)
                .map(|s| {
                    let (nr, ns) = (sizes[r] as f64, sizes[s] as f64);
                    if r == s {
                        (1.0 - spec.mixing) * group_mean[r] / nr
                    } else {
                        a[r] * a[s] / (nr * ns)
                    }
                })
                .collect()
        })
        .collect();
    let sbm = SbmSpec { sizes, omega, theta: Some(degrees) };
    sbm.validate()?;
    Ok(sbm)
}

pub fn generate_dcsbm_powerlaw<R: Rng + ?Sized>(
    spec: &PowerLawSpec,
    rng: &mut R,
) -> Result<(Graph, Vec<usize>, SbmSpec)> {
    let sbm = power_law_spec(spec, rng)?;
    let (graph, truth) = generate_sbm(&sbm, rng)?;
    Ok((graph, truth, sbm))
}
