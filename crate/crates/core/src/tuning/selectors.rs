//! Block count, block length and bootstrap bandwidth selectors.
//!
//! Every "∝" rule uses unit constants; the unrounded values are kept in
//! [`RawSelection`] and [`TuningSelection::scaled`] applies multipliers.

use serde::{Deserialize, Serialize};

use super::gfun::{b_max, b_min, beta1_cached, beta2_cached, g1, g2, GammaGConfig};
use crate::error::{Error, Result};
use crate::resample::make_nbc_params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectorRegime {
    PolynomialEbc,
    ExponentialEbc,
    PolynomialNbc,
    ExponentialNbc,
    PolynomialUns,
    ExponentialUns,
    Practical,
}

/// Exponents and auxiliary choices a selector actually applied.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExponentsUsed {
    pub b0: Option<f64>,
    pub delta: Option<f64>,
    pub delta_prime: Option<f64>,
    pub epsilon: Option<f64>,
    pub l_n: Option<String>,
    pub case: Option<String>,
}

/// Values before ceiling rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawSelection {
    pub b: f64,
    pub ell: f64,
    pub k1: f64,
}

/// Multipliers for the unit proportionality constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub b: f64,
    pub ell: f64,
    pub k1: f64,
}

impl Default for Multipliers {
    fn default() -> Self {
        Multipliers {
            b: 1.0,
            ell: 1.0,
            k1: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningSelection {
    pub b: usize,
    pub ell: usize,
    pub k1: f64,
    pub regime: SelectorRegime,
    pub exponents_used: ExponentsUsed,
    pub raw: RawSelection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl TuningSelection {
    /// Re-rounds after multiplying the unrounded values.
    pub fn scaled(&self, m: Multipliers) -> Result<TuningSelection> {
        for v in [m.b, m.ell, m.k1] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("multiplier must be positive, got {v}")));
            }
        }
        let raw = RawSelection {
            b: self.raw.b * m.b,
            ell: self.raw.ell * m.ell,
            k1: self.raw.k1 * m.k1,
        };
        Ok(TuningSelection {
            b: round_up(raw.b)?,
            ell: round_up(raw.ell)?,
            k1: raw.k1,
            raw,
            ..self.clone()
        })
    }
}

/// Ceiling to a positive integer; values within 1e-12 (relative) of an
/// integer are taken as that integer.
pub fn round_up(x: f64) -> Result<usize> {
    if !x.is_finite() || x > 1e15 {
        return Err(Error::InvalidParameter(format!("cannot round {x} to a count")));
    }
    let nearest = x.round();
    let r = if (x - nearest).abs() <= 1e-12 * x.abs().max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    Ok(r.max(1.0) as usize)
}

fn check_n(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be >= 2, got {n}")));
    }
    Ok(n as f64)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn log_scale(n: usize, a: f64) -> Result<(f64, f64)> {
    if n < 8 {
        return Err(Error::TooSmallForLog(n));
    }
    check_positive("L_n exponent", a)?;
    let ln_n = (n as f64).ln();
    Ok((ln_n, ln_n.powf(-a)))
}

fn ensure_fits(ell: usize, n: usize, what: &str) -> Result<()> {
    if ell > n {
        return Err(Error::RegimeInfeasible(format!(
            "{what}: block length {ell} exceeds n = {n}"
        )));
    }
    Ok(())
}

/// Admissible practical-choice window at β1: (b_min, b_max).
pub fn practical_window(cfg: &GammaGConfig) -> Result<(f64, f64)> {
    let b1 = beta1_cached(cfg)?;
    Ok((b_min(b1, cfg)?, b_max(b1)?))
}

/// Practical EBC choice needing no knowledge of the mixing rate.
pub fn practical_choice_ebc(n: usize, b0: f64, delta: f64) -> Result<TuningSelection> {
    let nf = check_n(n)?;
    let (lo, hi) = practical_window(&GammaGConfig::default())?;
    let delta_hi = (hi - lo) / 3.0;
    let (b0_lo, b0_hi) = (lo + 2.0 * delta, hi - delta);
    if !(delta > 0.0 && delta < delta_hi && b0 > b0_lo && b0 < b0_hi) {
        return Err(Error::WindowViolated {
            b0,
            delta,
            b0_lo,
            b0_hi,
            delta_hi,
        });
    }
    let e = (b0 / 2.0).min(1.0 - b0);
    let raw = RawSelection {
        b: nf.powf(b0),
        ell: nf.powf(e),
        k1: nf.powf(-e + delta / 2.0),
    };
    let ell = round_up(raw.ell)?;
    ensure_fits(ell, n, "practical choice")?;
    Ok(TuningSelection {
        b: round_up(raw.b)?,
        ell,
        k1: raw.k1,
        regime: SelectorRegime::Practical,
        exponents_used: ExponentsUsed {
            b0: Some(b0),
            delta: Some(delta),
            ..Default::default()
        },
        raw,
        flags: Vec::new(),
    })
}

/// Upper end of the δ′ interval in the β ≤ β1 case.
pub fn ebc_delta_prime_bound(beta: f64, g: f64) -> f64 {
    let q = 5.0 * beta * beta - 5.0 * beta - 4.0;
    2.0 * beta * (2.0 * beta - 4.0 + 3.0 * beta * (beta - 1.0) * g) / (q * (5.0 * beta - 4.0 - 6.0 * beta * g))
}

/// EBC choice under polynomial mixing with a given block count b.
pub fn ebc_optimal_poly(beta: f64, n: usize, b: usize, delta: f64, cfg: &GammaGConfig) -> Result<TuningSelection> {
    let nf = check_n(n)?;
    check_positive("delta", delta)?;
    let lo = nf.powf(b_min(beta, cfg)? + 2.0 * delta);
    let hi = nf.powf(b_max(beta)? - delta);
    let bf = b as f64;
    if b == 0 || bf < lo * (1.0 - 1e-12) || bf > hi * (1.0 + 1e-12) {
        return Err(Error::BOutsideWindow { b, lo, hi });
    }
    let mut flags = Vec::new();
    let (ell_raw, k1_raw, delta_prime, case) = if beta <= beta1_cached(cfg)? {
        let g = g1(beta, cfg)?.value;
        let ell_raw = bf.powf(1.0 + beta / (2.0 - 3.0 * beta + 3.0 * beta * g)).min(nf / bf);
        let bound = ebc_delta_prime_bound(beta, g);
        let delta_prime = if bound > 0.0 && bound.is_finite() {
            bound.min(delta / 2.0) / 2.0
        } else {
            flags.push("delta_prime_clamped".to_string());
            delta / 4.0
        };
        let spread = (ell_raw / bf)
            .max((bf * ell_raw).powf(-beta / (5.0 * beta - 4.0 - 6.0 * beta * g)))
            .max(1.0 / ell_raw);
        (ell_raw, nf.powf(delta_prime) * spread, delta_prime, "i")
    } else {
        let ell_raw = bf.sqrt().min(nf / bf);
        let delta_prime = delta / 4.0;
        (ell_raw, nf.powf(delta_prime) / ell_raw, delta_prime, "ii")
    };
    let ell = round_up(ell_raw)?;
    ensure_fits(ell, n, "EBC polynomial")?;
    Ok(TuningSelection {
        b,
        ell,
        k1: k1_raw,
        regime: SelectorRegime::PolynomialEbc,
        exponents_used: ExponentsUsed {
            delta: Some(delta),
            delta_prime: Some(delta_prime),
            case: Some(case.to_string()),
            ..Default::default()
        },
        raw: RawSelection {
            b: bf,
            ell: ell_raw,
            k1: k1_raw,
        },
        flags,
    })
}

fn l_n_label(a: f64) -> String {
    format!("(ln n)^(-{a})")
}

/// EBC choice under exponential mixing, L_n = (ln n)^(-a).
pub fn ebc_optimal_expo(n: usize, a: f64) -> Result<TuningSelection> {
    let (ln_n, l_n) = log_scale(n, a)?;
    let nf = n as f64;
    let ell_raw = nf.cbrt() * ln_n.powf(2.0 / 3.0) * l_n.sqrt();
    let k1 = 1.0 / (ell_raw * l_n.sqrt());
    let ell = round_up(ell_raw)?;
    ensure_fits(ell, n, "EBC exponential")?;
    Ok(TuningSelection {
        b: round_up(nf / ell as f64)?,
        ell,
        k1,
        regime: SelectorRegime::ExponentialEbc,
        exponents_used: ExponentsUsed {
            l_n: Some(l_n_label(a)),
            ..Default::default()
        },
        raw: RawSelection {
            b: nf / ell_raw,
            ell: ell_raw,
            k1,
        },
        flags: Vec::new(),
    })
}

/// Case thresholds of the polynomial NBC rule: (A, B, C) with case (i)
/// for h ≤ min(n^-A, n^-B) and case (ii) for h > max(n^-A, n^-C).
pub fn nbc_poly_thresholds(beta: f64, g: f64, delta: f64, epsilon: f64) -> (f64, f64, f64) {
    let a = (7.0 * beta - 4.0) * (5.0 - 2.0 * epsilon) / (125.0 * beta - 100.0);
    let b = (30.0 * g + 25.0 + 20.0 * delta - epsilon * (12.0 * g + 14.0)) / (150.0 * g + 75.0);
    let denom = 35.0 * beta - 40.0 - 30.0 * beta * g;
    let c = if denom > 0.0 {
        (7.0 * beta - 4.0) * (1.0 - 2.0 * delta) / denom
    } else {
        f64::INFINITY
    };
    (a, b, c)
}

#[allow(clippy::too_many_arguments)]
fn nbc_selection(
    n: usize,
    h: f64,
    c0: f64,
    raw_b: f64,
    raw_ell: f64,
    regime: SelectorRegime,
    exponents_used: ExponentsUsed,
    flags: Vec<String>,
) -> Result<TuningSelection> {
    if raw_b < 1.0 - 1e-12 || raw_ell < 1.0 - 1e-12 {
        return Err(Error::RegimeInfeasible(format!(
            "unrounded b = {raw_b}, ell = {raw_ell} below 1"
        )));
    }
    let b = round_up(raw_b)?;
    let ell = round_up(raw_ell)?;
    ensure_fits(ell, n, "NBC")?;
    let k1 = make_nbc_params(n, h, b, ell, c0)?.k1;
    Ok(TuningSelection {
        b,
        ell,
        k1,
        regime,
        exponents_used,
        raw: RawSelection {
            b: raw_b,
            ell: raw_ell,
            k1,
        },
        flags,
    })
}

/// NBC choice under polynomial mixing. The reported k1 is the NBC
/// bootstrap bandwidth implied by the rounded (b, ℓ) and c0.
pub fn nbc_optimal_poly(
    beta: f64,
    n: usize,
    h: f64,
    delta: f64,
    epsilon: f64,
    c0: f64,
    cfg: &GammaGConfig,
) -> Result<TuningSelection> {
    let nf = check_n(n)?;
    check_positive("h", h)?;
    check_positive("delta", delta)?;
    check_positive("epsilon", epsilon)?;
    let g = g1(beta, cfg)?.value;
    let (ta, tb, tc) = nbc_poly_thresholds(beta, g, delta, epsilon);
    let mut flags = Vec::new();
    let mut ell_window = |lo: f64, hi: f64| {
        if lo > hi {
            flags.push("ell_window_empty".to_string());
        }
        (lo * hi).sqrt()
    };
    let (bl, ell_raw, case) = if h <= nf.powf(-ta).min(nf.powf(-tb)) {
        let ell = (nf * h.powi(5)).powf(-0.5) * nf.powf(2.0 * epsilon / 5.0);
        let b = nf.powf(-1.0 + 3.0 * epsilon / 5.0) * h.powi(-5);
        (b * ell, ell, "i")
    } else if h > nf.powf(-ta).max(nf.powf(-tc)) {
        let bl = nf * h.powf((10.0 * beta - 20.0) / (7.0 * beta - 4.0));
        let lo = nf.powf(epsilon / 5.0) * h.powf(-5.0 * beta / (7.0 * beta - 4.0));
        let hi = nf.sqrt() * h.powf((15.0 * beta - 20.0) / (14.0 * beta - 8.0));
        (bl, ell_window(lo, hi), "ii")
    } else {
        let r = 6.0 * g + 7.0;
        let bl = (nf.powf(6.0 * g + 2.0 + 10.0 * delta) * h.powf(30.0 * g - 15.0)).powf(1.0 / r);
        let lo = nf.powf(epsilon / 5.0) * (nf.powf(1.0 - 2.0 * delta) * h.powi(10)).powf(-1.0 / r);
        let hi = (nf.powf(6.0 * g + 3.0 + 8.0 * delta) * h.powf(30.0 * g - 5.0)).powf(1.0 / (12.0 * g + 14.0));
        (bl, ell_window(lo, hi), "iii")
    };
    nbc_selection(
        n,
        h,
        c0,
        bl / ell_raw,
        ell_raw,
        SelectorRegime::PolynomialNbc,
        ExponentsUsed {
            delta: Some(delta),
            epsilon: Some(epsilon),
            case: Some(case.to_string()),
            ..Default::default()
        },
        flags,
    )
}

/// Surrogate for the divergence conditions on ℓ in the exponential NBC rule.
pub const DIVERGENCE_SURROGATE: f64 = 1e3;

/// True when h²⁵ ≤ n⁻⁷(ln n)⁻¹⁸, the first branch of the exponential NBC rule.
pub fn nbc_expo_first_branch(n: usize, h: f64) -> bool {
    let ln_n = (n as f64).ln();
    25.0 * h.ln() <= -7.0 * ln_n - 18.0 * ln_n.ln()
}

/// NBC choice under exponential mixing.
pub fn nbc_optimal_expo(n: usize, h: f64, c0: f64) -> Result<TuningSelection> {
    if n < 8 {
        return Err(Error::TooSmallForLog(n));
    }
    check_positive("h", h)?;
    let nf = n as f64;
    let ln_n = nf.ln();
    let (bl_raw, ell, case) = if nbc_expo_first_branch(n, h) {
        let bl = nf.powf(4.0 / 9.0) * h.powf(-5.0 / 9.0);
        let ell = round_up((DIVERGENCE_SURROGATE / (nf * h.powi(10))).powf(1.0 / 9.0))?;
        (bl, ell, "first")
    } else {
        let bl = nf * (h * ln_n).powf(10.0 / 7.0);
        let ell = round_up((DIVERGENCE_SURROGATE * ln_n * ln_n / h.powi(5)).powf(1.0 / 7.0))?;
        (bl, ell, "second")
    };
    let bl = round_up(bl_raw)?;
    if ell > bl {
        return Err(Error::RegimeInfeasible(format!(
            "block length {ell} exceeds total length {bl}"
        )));
    }
    ensure_fits(ell, n, "NBC exponential")?;
    let b = round_up(bl as f64 / ell as f64)?;
    let k1 = make_nbc_params(n, h, b, ell, c0)?.k1;
    Ok(TuningSelection {
        b,
        ell,
        k1,
        regime: SelectorRegime::ExponentialNbc,
        exponents_used: ExponentsUsed {
            case: Some(case.to_string()),
            ..Default::default()
        },
        raw: RawSelection {
            b: bl_raw / ell as f64,
            ell: ell as f64,
            k1,
        },
        flags: Vec::new(),
    })
}

/// Subsampling (b = 1) version of the exponential NBC rule.
pub fn nbc_subsampling_expo(n: usize, h: f64, c0: f64) -> Result<TuningSelection> {
    if n < 8 {
        return Err(Error::TooSmallForLog(n));
    }
    check_positive("h", h)?;
    let nf = n as f64;
    let ell_raw = (nf.powf(4.0 / 9.0) * h.powf(-5.0 / 9.0)).max(nf * (h * nf.ln()).powf(10.0 / 7.0));
    let ell = round_up(ell_raw)?;
    ensure_fits(ell, n, "NBC subsampling")?;
    let k1 = make_nbc_params(n, h, 1, ell, c0)?.k1;
    Ok(TuningSelection {
        b: 1,
        ell,
        k1,
        regime: SelectorRegime::ExponentialNbc,
        exponents_used: ExponentsUsed {
            case: Some("subsampling".to_string()),
            ..Default::default()
        },
        raw: RawSelection {
            b: 1.0,
            ell: ell_raw,
            k1,
        },
        flags: Vec::new(),
    })
}

/// Exponent of n in the polynomial UNS bandwidth rule, with the branch name.
pub fn uns_k_exponent(beta: f64, delta_prime: f64, cfg: &GammaGConfig) -> Result<(f64, &'static str)> {
    let b1 = beta1_cached(cfg)?;
    if beta <= 2.0 {
        return Err(Error::BetaOutOfRange(beta));
    }
    if beta < b1 {
        let g = g1(beta, cfg)?.value;
        return Ok((-beta / (beta * (5.0 - 6.0 * g) - 4.0), "g1"));
    }
    if beta > 4.0 && beta < beta2_cached(cfg)? {
        let g = g2(beta, cfg)?.value;
        return Ok((-2.0 * beta / (beta * (7.0 - 3.0 * g) - 4.0), "g2"));
    }
    Ok((-1.0 / 3.0 + delta_prime, "cube_root"))
}

/// UNS choice under polynomial mixing.
pub fn uns_optimal_poly(beta: f64, n: usize, delta_prime: f64, cfg: &GammaGConfig) -> Result<TuningSelection> {
    let nf = check_n(n)?;
    check_positive("delta_prime", delta_prime)?;
    let (expo, case) = uns_k_exponent(beta, delta_prime, cfg)?;
    let k = nf.powf(expo);
    let ell_raw = k.powf(-1.0 - delta_prime);
    let ell = round_up(ell_raw)?;
    ensure_fits(ell, n, "UNS polynomial")?;
    Ok(TuningSelection {
        b: round_up(nf / ell as f64)?,
        ell,
        k1: k,
        regime: SelectorRegime::PolynomialUns,
        exponents_used: ExponentsUsed {
            delta_prime: Some(delta_prime),
            case: Some(case.to_string()),
            ..Default::default()
        },
        raw: RawSelection {
            b: nf / ell_raw,
            ell: ell_raw,
            k1: k,
        },
        flags: Vec::new(),
    })
}

/// UNS choice under exponential mixing, L_n = (ln n)^(-a).
pub fn uns_optimal_expo(n: usize, a: f64) -> Result<TuningSelection> {
    let (ln_n, l_n) = log_scale(n, a)?;
    let nf = n as f64;
    let k = nf.powf(-1.0 / 3.0) * ln_n.powf(-2.0 / 3.0) / l_n;
    let ell_raw = 1.0 / (k * l_n.powi(3));
    let ell = round_up(ell_raw)?;
    ensure_fits(ell, n, "UNS exponential")?;
    Ok(TuningSelection {
        b: round_up(nf / ell as f64)?,
        ell,
        k1: k,
        regime: SelectorRegime::ExponentialUns,
        exponents_used: ExponentsUsed {
            l_n: Some(l_n_label(a)),
            ..Default::default()
        },
        raw: RawSelection {
            b: nf / ell_raw,
            ell: ell_raw,
            k1: k,
        },
        flags: Vec::new(),
    })
}
