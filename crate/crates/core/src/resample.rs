//! Hybrid block bootstrap for the centred kernel density statistic.
//!
//! For block length ℓ and bootstrap bandwidth k, block `i` contributes
//! U_i = (ℓk)⁻¹ Σ_{t=i}^{i+ℓ−1} K((X_t − x0)/k). A bootstrap draw picks b
//! block indices uniformly with replacement and averages their U values.
//! The statistic
//!
//! T* = (bℓk1)^{1/2} (f̂*_{k1} − E[f̂*_{k1} | X]) + τ (E[f̂*_{k2} | X] − f̂_{k3}(x0))
//!
//! has a random first term and a second term fixed by the sample.

use rand::distr::{Distribution, Uniform};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{kde, DensityEvalPoint, KernelSpec};
use crate::rng::RngStream;

/// Windows this short are summed directly; longer ones slide.
const DIRECT_WINDOW_MAX: usize = 8;
/// Sliding sums are recomputed from scratch at this period.
const SLIDING_RESET: usize = 4096;
/// Bootstrap draws per random sub-stream.
pub const DRAW_CHUNK: usize = 1024;
/// Default cap on the resampled length b·ℓ, as a multiple of n.
pub const DEFAULT_LENGTH_CAP_FACTOR: usize = 64;
/// Upper bound on the number of index tuples [`enumerate_t_star`] visits.
pub const ENUMERATION_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ebc,
    Nbc,
    Uns,
    Custom,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Ebc => "EBC",
            Method::Nbc => "NBC",
            Method::Uns => "UNS",
            Method::Custom => "Custom",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ebc" => Ok(Method::Ebc),
            "nbc" => Ok(Method::Nbc),
            "uns" => Ok(Method::Uns),
            "custom" => Ok(Method::Custom),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

/// The tuple (b, ℓ, τ, k1, k2, k3) defining one bootstrap estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapParams {
    pub b: usize,
    pub ell: usize,
    pub tau: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub method: Method,
    /// Recorded for EBC and NBC.
    pub c0: Option<f64>,
    /// Recorded for EBC.
    pub c2: Option<f64>,
}

fn check_c0(c0: f64) -> Result<()> {
    if c0 > 0.0 && c0 < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidC0(c0))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn check_counts(b: usize, ell: usize) -> Result<()> {
    if b == 0 || ell == 0 {
        return Err(Error::InvalidParameter(format!(
            "b and ell must be >= 1, got b = {b}, ell = {ell}"
        )));
    }
    Ok(())
}

impl BootstrapParams {
    /// Custom parameter tuple; validated structurally, not against a sample.
    pub fn custom(b: usize, ell: usize, tau: f64, k1: f64, k2: f64, k3: f64) -> Result<Self> {
        let p = BootstrapParams {
            b,
            ell,
            tau,
            k1,
            k2,
            k3,
            method: Method::Custom,
            c0: None,
            c2: None,
        };
        p.check_structure()?;
        Ok(p)
    }

    fn check_structure(&self) -> Result<()> {
        check_counts(self.b, self.ell)?;
        check_positive("k1", self.k1)?;
        check_positive("k2", self.k2)?;
        check_positive("k3", self.k3)?;
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau must be >= 0, got {}", self.tau)));
        }
        match self.method {
            Method::Uns if self.tau != 0.0 => {
                return Err(Error::InvalidParameter("UNS requires tau = 0".into()));
            }
            Method::Nbc => {
                if self.k1 != self.k2 {
                    return Err(Error::InvalidParameter("NBC requires k1 = k2".into()));
                }
                let expected = ((self.b * self.ell) as f64 * self.k1).sqrt();
                if (self.tau - expected).abs() > 1e-12 * expected {
                    return Err(Error::InvalidParameter("NBC requires tau = (b ell k1)^(1/2)".into()));
                }
            }
            _ => {}
        }
        if let Some(c0) = self.c0 {
            check_c0(c0)?;
        }
        if self.tau > 0.0 && matches!(self.method, Method::Ebc | Method::Nbc) && !(self.k3 < self.k2) {
            return Err(Error::InvalidParameter("bias correction requires k3 < k2".into()));
        }
        Ok(())
    }

    /// Checks the tuple against a sample of size `n` with the default
    /// length cap.
    pub fn validate(&self, n: usize) -> Result<()> {
        self.validate_with_cap(n, DEFAULT_LENGTH_CAP_FACTOR * n)
    }

    pub fn validate_with_cap(&self, n: usize, cap: usize) -> Result<()> {
        self.check_structure()?;
        if self.ell > n {
            return Err(Error::BlockTooLong { ell: self.ell, n });
        }
        let total = self.b.saturating_mul(self.ell);
        if total > cap.max(n) {
            return Err(Error::RegimeInfeasible(format!(
                "resampled length b*ell = {total} exceeds cap {}",
                cap.max(n)
            )));
        }
        if total > 4 * n {
            log::warn!("resampled length b*ell = {total} exceeds 4n = {}", 4 * n);
        }
        Ok(())
    }

    /// Number of candidate blocks n − ℓ + 1.
    pub fn block_count(&self, n: usize) -> usize {
        n + 1 - self.ell
    }
}

/// EBC: k2 = c2·n^{−1/9}, k3 = c0·k2, τ = (1−c0²)⁻¹ n^{1/2} h^{5/2} k2⁻².
pub fn make_ebc_params(n: usize, h: f64, b: usize, ell: usize, k1: f64, c0: f64, c2: f64) -> Result<BootstrapParams> {
    check_c0(c0)?;
    check_counts(b, ell)?;
    check_positive("h", h)?;
    check_positive("k1", k1)?;
    check_positive("c2", c2)?;
    let nf = n as f64;
    let k2 = c2 * nf.powf(-1.0 / 9.0);
    let k3 = c0 * k2;
    let tau = nf.sqrt() * h.powf(2.5) / ((1.0 - c0 * c0) * k2 * k2);
    Ok(BootstrapParams {
        b,
        ell,
        tau,
        k1,
        k2,
        k3,
        method: Method::Ebc,
        c0: Some(c0),
        c2: Some(c2),
    })
}

/// NBC: k1 = k2 = (1−c0²)^{−2/5} n^{1/5} (bℓ)^{−1/5} h, k3 = c0·k1, τ = (bℓk1)^{1/2}.
pub fn make_nbc_params(n: usize, h: f64, b: usize, ell: usize, c0: f64) -> Result<BootstrapParams> {
    check_c0(c0)?;
    check_counts(b, ell)?;
    check_positive("h", h)?;
    let bl = (b * ell) as f64;
    let k = (1.0 - c0 * c0).powf(-0.4) * (n as f64).powf(0.2) * bl.powf(-0.2) * h;
    Ok(BootstrapParams {
        b,
        ell,
        tau: (bl * k).sqrt(),
        k1: k,
        k2: k,
        k3: c0 * k,
        method: Method::Nbc,
        c0: Some(c0),
        c2: None,
    })
}

/// UNS: τ = 0, the bias term is dropped.
pub fn make_uns_params(b: usize, ell: usize, k1: f64) -> Result<BootstrapParams> {
    check_counts(b, ell)?;
    check_positive("k1", k1)?;
    Ok(BootstrapParams {
        b,
        ell,
        tau: 0.0,
        k1,
        k2: k1,
        k3: k1,
        method: Method::Uns,
        c0: None,
        c2: None,
    })
}

/// Block averages U_{1..n−ℓ+1} for one (ℓ, k, x0).
///
/// Stored as raw window kernel sums; U_i = sum_i / (ℓk).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStats {
    sums: Vec<f64>,
    pub ell: usize,
    pub k: f64,
    pub x0: f64,
}

struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn new(sum: f64) -> Self {
        Neumaier { sum, comp: 0.0 }
    }

    #[inline]
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Window sums of `weights` over every length-`ell` window.
pub(crate) fn window_sums(weights: &[f64], ell: usize) -> Vec<f64> {
    let n = weights.len();
    let count = n + 1 - ell;
    let mut sums = Vec::with_capacity(count);
    if ell <= DIRECT_WINDOW_MAX {
        for i in 0..count {
            let mut s = 0.0;
            for &w in &weights[i..i + ell] {
                s += w;
            }
            sums.push(s);
        }
        return sums;
    }
    let direct = |i: usize| weights[i..i + ell].iter().fold(0.0, |acc, &w| acc + w);
    let mut nonzero = weights[..ell].iter().filter(|&&w| w != 0.0).count();
    let mut acc = Neumaier::new(direct(0));
    sums.push(acc.sum);
    for i in 1..count {
        let leaving = weights[i - 1];
        let entering = weights[i + ell - 1];
        nonzero = nonzero + usize::from(entering != 0.0) - usize::from(leaving != 0.0);
        if nonzero == 0 {
            acc = Neumaier::new(0.0);
            sums.push(0.0);
            continue;
        }
        if i % SLIDING_RESET == 0 {
            acc = Neumaier::new(direct(i));
        } else {
            acc.add(entering);
            acc.add(-leaving);
        }
        sums.push(acc.value().max(0.0));
    }
    sums
}

impl BlockStats {
    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    /// Raw window kernel sums Σ K((X_t − x0)/k).
    pub fn window_sums(&self) -> &[f64] {
        &self.sums
    }

    /// U_i (zero-based `i`).
    pub fn value(&self, i: usize) -> f64 {
        self.sums[i] / (self.ell as f64 * self.k)
    }

    pub fn values(&self) -> Vec<f64> {
        let scale = self.ell as f64 * self.k;
        self.sums.iter().map(|s| s / scale).collect()
    }

    fn compatible(&self, other: &BlockStats) -> Result<()> {
        if self.ell != other.ell || self.x0.to_bits() != other.x0.to_bits() || self.len() != other.len() {
            return Err(Error::IncompatibleStats(format!(
                "(ell = {}, x0 = {}, len = {}) vs (ell = {}, x0 = {}, len = {})",
                self.ell,
                self.x0,
                self.len(),
                other.ell,
                other.x0,
                other.len()
            )));
        }
        Ok(())
    }
}

/// U_{i,k,ℓ} for all n − ℓ + 1 blocks, in O(n).
pub fn block_stats(sample: &[f64], ell: usize, k: f64, x0: f64, spec: &KernelSpec) -> Result<BlockStats> {
    let n = sample.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if ell == 0 {
        return Err(Error::InvalidParameter("ell must be >= 1".into()));
    }
    if ell > n {
        return Err(Error::BlockTooLong { ell, n });
    }
    check_positive("k", k)?;
    let weights: Vec<f64> = sample.iter().map(|&x| spec.eval((x - x0) / k)).collect();
    Ok(BlockStats {
        sums: window_sums(&weights, ell),
        ell,
        k,
        x0,
    })
}

/// E[f̂* | X] = mean of the U values.
pub fn conditional_mean(stats: &BlockStats) -> f64 {
    let total = stats.sums.iter().fold(0.0, |acc, &s| acc + s);
    total / ((stats.len() * stats.ell) as f64 * stats.k)
}

/// (bℓk)^{1/2} (f̂* − mean) from the summed window sums of one draw.
#[inline]
pub(crate) fn centred_term(sum: f64, b: usize, ell: usize, k: f64, mean: f64) -> f64 {
    let scale = (b * ell) as f64 * k;
    scale.sqrt() * (sum / scale - mean)
}

/// Everything about T* that is fixed once the sample is fixed.
struct TStarSampler<'a> {
    sums: &'a [f64],
    b: usize,
    ell: usize,
    k1: f64,
    mean1: f64,
    shift: f64,
    blocks: Uniform<u32>,
}

impl<'a> TStarSampler<'a> {
    fn new(stats1: &'a BlockStats, stats2: &BlockStats, f_k3: f64, params: &BootstrapParams) -> Result<Self> {
        stats1.compatible(stats2)?;
        if stats1.ell != params.ell {
            return Err(Error::IncompatibleStats(format!(
                "block statistics built with ell = {}, params have ell = {}",
                stats1.ell, params.ell
            )));
        }
        if stats1.k != params.k1 || stats2.k != params.k2 {
            return Err(Error::IncompatibleStats(format!(
                "bandwidths ({}, {}) do not match params (k1 = {}, k2 = {})",
                stats1.k, stats2.k, params.k1, params.k2
            )));
        }
        let blocks = u32::try_from(stats1.len())
            .ok()
            .and_then(|len| Uniform::new(0, len).ok())
            .ok_or_else(|| Error::InvalidParameter("too many blocks".into()))?;
        Ok(TStarSampler {
            sums: &stats1.sums,
            b: params.b,
            ell: params.ell,
            k1: params.k1,
            mean1: conditional_mean(stats1),
            shift: params.tau * (conditional_mean(stats2) - f_k3),
            blocks,
        })
    }

    #[inline]
    fn value_of(&self, sum: f64) -> f64 {
        centred_term(sum, self.b, self.ell, self.k1, self.mean1) + self.shift
    }

    #[inline]
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut sum = 0.0;
        for _ in 0..self.b {
            sum += self.sums[self.blocks.sample(rng) as usize];
        }
        self.value_of(sum)
    }

    fn count_le(&self, y: f64, draws: usize, stream: &RngStream) -> u64 {
        let chunks = draws.div_ceil(DRAW_CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = stream.fork(c as u64).rng();
                let len = DRAW_CHUNK.min(draws - c * DRAW_CHUNK);
                (0..len).filter(|_| self.draw(&mut rng) <= y).count() as u64
            })
            .sum()
    }
}

/// One draw of T*. The same index tuple J_1..J_b serves both bandwidths;
/// the k2 term only enters through its conditional mean.
pub fn draw_t_star<R: Rng + ?Sized>(
    stats1: &BlockStats,
    stats2: &BlockStats,
    f_k3: f64,
    params: &BootstrapParams,
    rng: &mut R,
) -> Result<f64> {
    Ok(TStarSampler::new(stats1, stats2, f_k3, params)?.draw(rng))
}

/// A bootstrap probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfEstimate {
    pub p_hat: f64,
    pub draws: usize,
    pub std_err: f64,
}

impl CdfEstimate {
    pub fn from_count(count: u64, draws: usize) -> Self {
        let p_hat = count as f64 / draws as f64;
        CdfEstimate {
            p_hat,
            draws,
            std_err: (p_hat * (1.0 - p_hat) / draws as f64).sqrt(),
        }
    }
}

/// The pieces of T* that depend only on the sample.
pub struct PreparedStatistic {
    stats1: BlockStats,
    stats2: BlockStats,
    f_k3: f64,
    params: BootstrapParams,
}

impl PreparedStatistic {
    pub fn new(sample: &[f64], params: &BootstrapParams, x0: f64, spec: &KernelSpec) -> Result<Self> {
        params.validate(sample.len())?;
        let stats1 = block_stats(sample, params.ell, params.k1, x0, spec)?;
        let stats2 = if params.k2 == params.k1 {
            stats1.clone()
        } else {
            block_stats(sample, params.ell, params.k2, x0, spec)?
        };
        let f_k3 = kde(sample, DensityEvalPoint::new(x0, params.k3)?, spec)?;
        Ok(PreparedStatistic {
            stats1,
            stats2,
            f_k3,
            params: *params,
        })
    }

    pub fn stats1(&self) -> &BlockStats {
        &self.stats1
    }

    pub fn stats2(&self) -> &BlockStats {
        &self.stats2
    }

    pub fn f_k3(&self) -> f64 {
        self.f_k3
    }

    /// The nonrandom part τ(E[f̂*_{k2}|X] − f̂_{k3}).
    pub fn shift(&self) -> f64 {
        self.params.tau * (conditional_mean(&self.stats2) - self.f_k3)
    }

    fn sampler(&self) -> TStarSampler<'_> {
        TStarSampler::new(&self.stats1, &self.stats2, self.f_k3, &self.params).expect("consistent by construction")
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sampler().draw(rng)
    }

    /// P(T* ≤ y | X) from `draws` draws split over fixed-size sub-streams.
    pub fn cdf(&self, y: f64, draws: usize, stream: &RngStream) -> Result<CdfEstimate> {
        if draws == 0 {
            return Err(Error::InvalidParameter("B must be >= 1".into()));
        }
        Ok(CdfEstimate::from_count(
            self.sampler().count_le(y, draws, stream),
            draws,
        ))
    }

    /// The first `draws` values of T* in stream order.
    pub fn sample_values(&self, draws: usize, stream: &RngStream) -> Vec<f64> {
        let sampler = self.sampler();
        let mut out = Vec::with_capacity(draws);
        for c in 0..draws.div_ceil(DRAW_CHUNK) {
            let mut rng = stream.fork(c as u64).rng();
            let len = DRAW_CHUNK.min(draws - c * DRAW_CHUNK);
            out.extend((0..len).map(|_| sampler.draw(&mut rng)));
        }
        out
    }

    /// Exact law of T* over all (n−ℓ+1)^b index tuples.
    pub fn exact_law(&self) -> Result<ExactLaw> {
        let sampler = self.sampler();
        let sums = enumerate_sums(&self.stats1, self.params.b)?;
        Ok(ExactLaw::from_weighted(
            sums.into_iter().map(|(s, w)| (sampler.value_of(s), w)).collect(),
        ))
    }
}

/// Bootstrap estimate of P(T* ≤ y | X).
pub fn bootstrap_cdf(
    sample: &[f64],
    params: &BootstrapParams,
    x0: f64,
    y: f64,
    draws: usize,
    spec: &KernelSpec,
    stream: &RngStream,
) -> Result<CdfEstimate> {
    PreparedStatistic::new(sample, params, x0, spec)?.cdf(y, draws, stream)
}

/// A finitely supported law: sorted distinct atoms with probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactLaw {
    pub atoms: Vec<(f64, f64)>,
}

impl ExactLaw {
    /// Merges (value, multiplicity) pairs into a normalised law.
    fn from_weighted(mut items: Vec<(f64, u64)>) -> Self {
        items.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: u64 = items.iter().map(|&(_, w)| w).sum();
        let mut atoms: Vec<(f64, u64)> = Vec::new();
        for (v, w) in items {
            match atoms.last_mut() {
                Some(last) if last.0 == v => last.1 += w,
                _ => atoms.push((v, w)),
            }
        }
        ExactLaw {
            atoms: atoms.into_iter().map(|(v, w)| (v, w as f64 / total as f64)).collect(),
        }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.atoms.iter().filter(|a| a.0 <= y).map(|a| a.1).sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(v, p)| v * p).sum()
    }

    pub fn total_probability(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// Smallest atom with cdf ≥ q.
    pub fn quantile(&self, q: f64) -> f64 {
        let mut acc = 0.0;
        for &(v, p) in &self.atoms {
            acc += p;
            if acc >= q - 1e-12 {
                return v;
            }
        }
        self.atoms.last().map(|a| a.0).unwrap_or(f64::NAN)
    }
}

/// Every index tuple's summed window sum, with multiplicity 1 each.
fn enumerate_sums(stats: &BlockStats, b: usize) -> Result<Vec<(f64, u64)>> {
    let blocks = stats.len();
    let size = (blocks as f64).powi(b as i32);
    if size > ENUMERATION_LIMIT as f64 {
        return Err(Error::EnumerationTooLarge {
            size,
            limit: ENUMERATION_LIMIT,
        });
    }
    let total = blocks.pow(b as u32);
    let mut idx = vec![0usize; b];
    let mut out = Vec::with_capacity(total);
    for _ in 0..total {
        let mut sum = 0.0;
        for &j in &idx {
            sum += stats.sums[j];
        }
        out.push((sum, 1));
        for slot in idx.iter_mut().rev() {
            *slot += 1;
            if *slot < blocks {
                break;
            }
            *slot = 0;
        }
    }
    Ok(out)
}

/// Exact law of f̂*_{b,ℓ,k} by enumerating all index tuples.
pub fn enumerate_fstar(stats: &BlockStats, b: usize) -> Result<ExactLaw> {
    let scale = (b * stats.ell) as f64 * stats.k;
    let sums = enumerate_sums(stats, b)?;
    Ok(ExactLaw::from_weighted(
        sums.into_iter().map(|(s, w)| (s / scale, w)).collect(),
    ))
}

/// Exact law of T* for small instances ((n−ℓ+1)^b ≤ 10⁶).
pub fn enumerate_t_star(sample: &[f64], params: &BootstrapParams, x0: f64, spec: &KernelSpec) -> Result<ExactLaw> {
    PreparedStatistic::new(sample, params, x0, spec)?.exact_law()
}
