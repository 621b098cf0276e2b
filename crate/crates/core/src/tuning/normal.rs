use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::process::StationaryProcess;
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalApproxInputs {
    pub y: f64,
    pub n: usize,
    pub h: f64,
    pub f_x0: f64,
    pub f2_x0: f64,
    pub mu2: f64,
    pub nu2: f64,
}

impl NormalApproxInputs {
    /// Plug-in constants from a model's marginal density and a kernel.
    pub fn from_model(model: &dyn StationaryProcess, x0: f64, y: f64, n: usize, h: f64, spec: &KernelSpec) -> Self {
        NormalApproxInputs {
            y,
            n,
            h,
            f_x0: model.marginal_density(x0),
            f2_x0: model.marginal_density_dd(x0),
            mu2: spec.mu2,
            nu2: spec.nu2,
        }
    }

    /// Scaled leading bias n^{1/2} h^{5/2} f''(x0) μ2 / 2.
    pub fn bias_term(&self) -> f64 {
        (self.n as f64).sqrt() * self.h.powf(2.5) * self.f2_x0 * self.mu2 / 2.0
    }
}

pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Normal approximation to P(T_h ≤ y) with the leading bias shift.
pub fn normal_approx(inp: &NormalApproxInputs) -> Result<f64> {
    if !(inp.f_x0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "f(x0) must be positive, got {}",
            inp.f_x0
        )));
    }
    if !(inp.nu2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "nu2 must be positive, got {}",
            inp.nu2
        )));
    }
    Ok(std_normal_cdf((inp.y - inp.bias_term()) / (inp.f_x0 * inp.nu2).sqrt()))
}

/// (nh)Var f̂_h(x0) for an i.i.d. sample from the model's marginal density.
pub fn variance_exact_iid(model: &dyn StationaryProcess, x0: f64, h: f64, spec: &KernelSpec) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
    }
    let (a, b) = spec.integration_range();
    let second = integrate(
        |u| {
            let k = spec.eval(u);
            k * k * model.marginal_density(x0 + h * u)
        },
        a,
        b,
        1e-13,
        1e-11,
    )?;
    let first = integrate(
        |u| spec.eval(u) * model.marginal_density(x0 + h * u),
        a,
        b,
        1e-13,
        1e-11,
    )?;
    Ok(second - h * first * first)
}
