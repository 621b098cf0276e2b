//! γ0, the g-functions and the thresholds derived from them.
//!
//! The infima defining g0, g1 and g2 are taken over real d ≥ 3. The
//! bracketed expressions grow at least linearly in d, so the search is cut
//! off once that linear lower bound exceeds the best value seen, and in
//! any case at `d_max`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SCAN_STEP: f64 = 1.0 / 64.0;
const GOLDEN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaGConfig {
    /// Truncation point for the infima over d.
    pub d_max: u32,
}

impl Default for GammaGConfig {
    fn default() -> Self {
        GammaGConfig { d_max: 400 }
    }
}

impl GammaGConfig {
    pub fn new(d_max: u32) -> Result<Self> {
        if d_max < 3 {
            return Err(Error::InvalidParameter(format!("d_max must be >= 3, got {d_max}")));
        }
        Ok(GammaGConfig { d_max })
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 2.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::BetaOutOfRange(beta))
    }
}

/// γ0(β, d); exactly 1 when β ≤ d − 1.
pub fn gamma0(beta: f64, d: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(d >= 3.0) {
        return Err(Error::InvalidParameter(format!("d must be >= 3, got {d}")));
    }
    Ok(gamma0_unchecked(beta, d))
}

#[inline]
fn gamma0_unchecked(beta: f64, d: f64) -> f64 {
    if beta <= d - 1.0 {
        return 1.0;
    }
    let ratio = (beta - 1.0) / (beta + d - 2.0);
    let base = (beta - 1.0) * (beta + d - 2.0) / (beta * beta + (d - 3.0) * beta + (d - 2.0) * (d - 2.0));
    let power = (beta - 1.0) / (beta - d + 1.0);
    1.0 - ratio * base.powf(power)
}

/// Value of an infimum together with the d attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Infimum {
    pub value: f64,
    pub minimizer_d: f64,
    /// The minimiser sits at the truncation point; the true infimum may be
    /// smaller.
    pub truncated: bool,
}

/// Minimises `expr` over d ∈ [3, d_max]; `floor(d)` must be a lower bound
/// of `expr(d)` that is increasing in d.
fn infimum<F, L>(expr: F, floor: L, cfg: &GammaGConfig) -> Infimum
where
    F: Fn(f64) -> f64,
    L: Fn(f64) -> f64,
{
    let d_max = cfg.d_max as f64;
    let mut best_d = 3.0;
    let mut best = expr(3.0);
    let mut j = 1u32;
    loop {
        let d = 3.0 + j as f64 * SCAN_STEP;
        if d > d_max || floor(d) > best {
            break;
        }
        let v = expr(d);
        if v < best {
            best = v;
            best_d = d;
        }
        j += 1;
    }
    // Golden-section refinement inside the neighbouring grid cells.
    let (mut lo, mut hi) = ((best_d - SCAN_STEP).max(3.0), (best_d + SCAN_STEP).min(d_max));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (expr(c), expr(d));
    while hi - lo > GOLDEN_TOL {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = expr(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = expr(d);
        }
    }
    for (v, at) in [(fc, c), (fd, d)] {
        if v < best {
            best = v;
            best_d = at;
        }
    }
    let truncated = best_d >= d_max - SCAN_STEP;
    if truncated {
        log::warn!("infimum may be unattained at truncation d_max = {}", cfg.d_max);
    }
    Infimum {
        value: best,
        minimizer_d: best_d,
        truncated,
    }
}

/// g0(β) = inf_d d(β/(β−1) − γ0(β, d)).
pub fn g0(beta: f64, cfg: &GammaGConfig) -> Result<Infimum> {
    check_beta(beta)?;
    let slope = beta / (beta - 1.0) - 1.0;
    Ok(infimum(
        |d| d * (beta / (beta - 1.0) - gamma0_unchecked(beta, d)),
        |d| d * slope,
        cfg,
    ))
}

/// g1(β) = (1/3) inf_d d(2 − γ0(β, d)) − 1.
pub fn g1(beta: f64, cfg: &GammaGConfig) -> Result<Infimum> {
    check_beta(beta)?;
    Ok(infimum(
        |d| d * (2.0 - gamma0_unchecked(beta, d)) / 3.0 - 1.0,
        |d| d / 3.0 - 1.0,
        cfg,
    ))
}

/// g2(β) = (1/3) inf_d d(2 − max{2γ0(β, 2d) − 1, 0}) − 1.
pub fn g2(beta: f64, cfg: &GammaGConfig) -> Result<Infimum> {
    check_beta(beta)?;
    Ok(infimum(
        |d| d * (2.0 - (2.0 * gamma0_unchecked(beta, 2.0 * d) - 1.0).max(0.0)) / 3.0 - 1.0,
        |d| d / 3.0 - 1.0,
        cfg,
    ))
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Residual 3g1(β) − (β−2)/β whose root is β1.
pub fn beta1_residual(beta: f64, cfg: &GammaGConfig) -> Result<f64> {
    Ok(3.0 * g1(beta, cfg)?.value - (beta - 2.0) / beta)
}

/// Residual 3g2(β) − (β−4)/β whose largest root is β2.
pub fn beta2_residual(beta: f64, cfg: &GammaGConfig) -> Result<f64> {
    Ok(3.0 * g2(beta, cfg)?.value - (beta - 4.0) / beta)
}

/// Solves 3g1(β) = (β−2)/β on (2, 4].
pub fn beta1(cfg: &GammaGConfig) -> Result<f64> {
    let f = |b: f64| beta1_residual(b, cfg).expect("beta > 2");
    let step = 0.01;
    let mut lo = 2.0 + 1e-6;
    let mut f_lo = f(lo);
    while lo < 4.0 {
        let hi = (lo + step).min(4.0);
        let f_hi = f(hi);
        if (f_hi > 0.0) != (f_lo > 0.0) {
            return Ok(bisect(f, lo, hi));
        }
        lo = hi;
        f_lo = f_hi;
    }
    Err(Error::RootBracketing { lo: 2.0, hi: 4.0 })
}

/// Largest root of 3g2(β) = (β−4)/β on (4, 50].
pub fn beta2(cfg: &GammaGConfig) -> Result<f64> {
    let f = |b: f64| beta2_residual(b, cfg).expect("beta > 2");
    let step = 0.01;
    let mut hi = 50.0;
    let mut f_hi = f(hi);
    while hi > 4.0 {
        let lo = (hi - step).max(4.0 + 1e-9);
        let f_lo = f(lo);
        if (f_hi > 0.0) != (f_lo > 0.0) {
            return Ok(bisect(f, lo, hi));
        }
        hi = lo;
        f_hi = f_lo;
        if lo <= 4.0 + 1e-9 {
            break;
        }
    }
    Err(Error::RootBracketing { lo: 4.0, hi: 50.0 })
}

fn cached(cell: &'static OnceLock<f64>, cfg: &GammaGConfig, compute: fn(&GammaGConfig) -> Result<f64>) -> Result<f64> {
    if *cfg != GammaGConfig::default() {
        return compute(cfg);
    }
    if let Some(v) = cell.get() {
        return Ok(*v);
    }
    let v = compute(cfg)?;
    Ok(*cell.get_or_init(|| v))
}

static BETA1: OnceLock<f64> = OnceLock::new();
static BETA2: OnceLock<f64> = OnceLock::new();

/// β1, memoised for the default configuration.
pub fn beta1_cached(cfg: &GammaGConfig) -> Result<f64> {
    cached(&BETA1, cfg, beta1)
}

/// β2, memoised for the default configuration.
pub fn beta2_cached(cfg: &GammaGConfig) -> Result<f64> {
    cached(&BETA2, cfg, beta2)
}

/// Lower end of the admissible exponent window for b.
pub fn b_min(beta: f64, cfg: &GammaGConfig) -> Result<f64> {
    check_beta(beta)?;
    let denom = 5.0 * beta * beta - 5.0 * beta - 4.0;
    if beta <= beta1_cached(cfg)? {
        let g = g1(beta, cfg)?.value;
        Ok((beta - 1.0) * (3.0 * beta - 2.0 - 3.0 * beta * g) / denom)
    } else {
        Ok(2.0 * beta * (beta - 1.0) / denom)
    }
}

/// Upper end of the admissible exponent window for b.
pub fn b_max(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok((4.0 * beta * beta - 4.0 * beta - 4.0) / (5.0 * beta * beta - 5.0 * beta - 4.0))
}

/// Exponent of the smallest attainable normal-approximation error order.
pub fn min_order_exponent(beta: f64) -> f64 {
    -(beta - 1.0) * (beta - 2.0) / (5.0 * beta * beta - 5.0 * beta - 4.0)
}
