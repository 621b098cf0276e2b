//! Kernels, the kernel density estimator and the centred statistic T_h.

use std::f64::consts::PI;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Integration range used for kernels with unbounded support; the Gaussian
/// density is below 1e-300 outside it.
const GAUSSIAN_CUTOFF: f64 = 38.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Epanechnikov,
    Gaussian,
}

/// A second-order kernel together with its moments `mu2 = ∫u²K` and
/// `nu2 = ∫K²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "KernelKind", into = "KernelKind")]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// Half-width of the support; `f64::INFINITY` for the Gaussian.
    pub support_radius: f64,
    pub mu2: f64,
    pub nu2: f64,
}

impl KernelSpec {
    /// Builds the kernel and verifies by quadrature that it is a density.
    pub fn new(kind: KernelKind) -> Result<Self> {
        let spec = Self::unchecked(kind);
        let (lo, hi) = spec.integration_range();
        let mass = quadrature::integrate(|u| spec.eval(u), lo, hi, 1e-13, 0.0)?;
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "kernel {kind:?} integrates to {mass}, not 1"
            )));
        }
        if !(spec.mu2 > 0.0 && spec.mu2.is_finite() && spec.nu2 > 0.0 && spec.nu2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kernel {kind:?} has degenerate moments"
            )));
        }
        Ok(spec)
    }

    pub fn epanechnikov() -> Self {
        Self::new(KernelKind::Epanechnikov).expect("Epanechnikov kernel is valid")
    }

    pub fn gaussian() -> Self {
        Self::new(KernelKind::Gaussian).expect("Gaussian kernel is valid")
    }

    fn unchecked(kind: KernelKind) -> Self {
        match kind {
            KernelKind::Epanechnikov => KernelSpec {
                kind,
                support_radius: 1.0,
                mu2: 0.2,
                nu2: 0.6,
            },
            KernelKind::Gaussian => KernelSpec {
                kind,
                support_radius: f64::INFINITY,
                mu2: 1.0,
                nu2: 0.5 / PI.sqrt(),
            },
        }
    }

    /// K(u); zero outside the support, including the Epanechnikov edges ±1.
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self.kind {
            KernelKind::Epanechnikov => {
                if u.abs() < 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
            KernelKind::Gaussian => (-0.5 * u * u).exp() / (2.0 * PI).sqrt(),
        }
    }

    /// Finite interval carrying all of the kernel's mass.
    pub fn integration_range(&self) -> (f64, f64) {
        let r = if self.support_radius.is_finite() {
            self.support_radius
        } else {
            GAUSSIAN_CUTOFF
        };
        (-r, r)
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::epanechnikov()
    }
}

impl From<KernelKind> for KernelSpec {
    fn from(kind: KernelKind) -> Self {
        KernelSpec::new(kind).expect("built-in kernels are valid")
    }
}

impl From<KernelSpec> for KernelKind {
    fn from(spec: KernelSpec) -> Self {
        spec.kind
    }
}

pub fn kernel_eval(spec: &KernelSpec, u: f64) -> f64 {
    spec.eval(u)
}

/// Closed-form `(mu2, nu2)`.
pub fn kernel_moments(spec: &KernelSpec) -> (f64, f64) {
    (spec.mu2, spec.nu2)
}

/// `(mu2, nu2)` by adaptive quadrature; agrees with [`kernel_moments`] to 1e-10.
pub fn kernel_moments_quadrature(spec: &KernelSpec) -> Result<(f64, f64)> {
    let (lo, hi) = spec.integration_range();
    let mu2 = quadrature::integrate(|u| u * u * spec.eval(u), lo, hi, 1e-13, 0.0)?;
    let nu2 = quadrature::integrate(|u| spec.eval(u).powi(2), lo, hi, 1e-13, 0.0)?;
    Ok((mu2, nu2))
}

/// Where a sample came from, when it was simulated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub model_id: String,
    pub seed: u64,
}

/// An observed stretch X_1..X_n of a stationary series, n ≥ 2.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesSample {
    values: Vec<f64>,
    pub origin: Option<Provenance>,
}

impl TimeSeriesSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a time series sample needs n >= 2, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite observation {bad}")));
        }
        Ok(TimeSeriesSample { values, origin: None })
    }

    pub fn with_origin(mut self, origin: Provenance) -> Self {
        self.origin = Some(origin);
        self
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl Deref for TimeSeriesSample {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// Evaluation point `x0` and bandwidth `h > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityEvalPoint {
    pub x0: f64,
    pub h: f64,
}

impl DensityEvalPoint {
    pub fn new(x0: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}")));
        }
        if !x0.is_finite() {
            return Err(Error::InvalidParameter(format!("x0 must be finite, got {x0}")));
        }
        Ok(DensityEvalPoint { x0, h })
    }
}

/// Σ K((X_i − x0)/h), accumulated in index order.
#[inline]
pub(crate) fn kernel_sum(values: &[f64], x0: f64, h: f64, spec: &KernelSpec) -> f64 {
    let mut sum = 0.0;
    for &x in values {
        sum += spec.eval((x - x0) / h);
    }
    sum
}

/// f̂_h(x0) = (nh)⁻¹ Σ K((X_i − x0)/h).
pub fn kde(sample: &[f64], pt: DensityEvalPoint, spec: &KernelSpec) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(kernel_sum(sample, pt.x0, pt.h, spec) / (sample.len() as f64 * pt.h))
}

/// T_h = (nh)^{1/2} (f̂_h(x0) − f(x0)).
pub fn t_statistic(sample: &[f64], pt: DensityEvalPoint, spec: &KernelSpec, f_true: f64) -> Result<f64> {
    if !(f_true >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "true density must be >= 0, got {f_true}"
        )));
    }
    let fhat = kde(sample, pt, spec)?;
    Ok((sample.len() as f64 * pt.h).sqrt() * (fhat - f_true))
}
