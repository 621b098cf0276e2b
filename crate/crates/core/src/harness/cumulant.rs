use std::io::Write;

use serde::{Deserialize, Serialize};

use super::oracle::kde_replications;
use crate::error::{Error, Result};
use crate::format::g17;
use crate::kernel::{DensityEvalPoint, KernelSpec};
use crate::process::StationaryProcess;
use crate::rng::{domain, RngStream};
use crate::tuning::variance_exact_iid;

/// Bandwidth as a function of n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum HRule {
    Fixed {
        h: f64,
    },
    /// h = scale · n^exponent.
    Power {
        scale: f64,
        exponent: f64,
    },
}

impl HRule {
    pub fn h(&self, n: usize) -> f64 {
        match *self {
            HRule::Fixed { h } => h,
            HRule::Power { scale, exponent } => scale * (n as f64).powf(exponent),
        }
    }
}

impl std::str::FromStr for HRule {
    type Err = Error;

    /// Accepts "0.5", "n^-0.2" or "1.3*n^-0.2".
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Parse(format!("cannot parse bandwidth rule '{s}'"));
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad());
        if let Some(idx) = t.find("n^") {
            let exponent = num(&t[idx + 2..])?;
            let scale = match &t[..idx] {
                "" => 1.0,
                head => num(head.strip_suffix('*').ok_or_else(bad)?)?,
            };
            Ok(HRule::Power { scale, exponent })
        } else {
            Ok(HRule::Fixed { h: num(&t)? })
        }
    }
}

/// Simulated moments of f̂_h(x0) at one n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantRow {
    pub n: usize,
    pub h: f64,
    pub mean: f64,
    pub mean_std_err: f64,
    /// f(x0) + h² f''(x0) μ2 / 2.
    pub mean_expected: f64,
    pub variance: f64,
    pub variance_std_err: f64,
    /// (nh)Var / (f(x0) ν2).
    pub ratio: f64,
    pub ratio_std_err: f64,
    /// The same ratio for an i.i.d. sample, by quadrature.
    pub iid_ratio: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn cumulant_check(
    model: &dyn StationaryProcess,
    n_list: &[usize],
    h_rule: HRule,
    x0: f64,
    kernel: &KernelSpec,
    replications: usize,
    seed: u64,
) -> Result<Vec<CumulantRow>> {
    if replications < 1000 {
        return Err(Error::InvalidParameter(format!(
            "R must be >= 1000, got {replications}"
        )));
    }
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] < 2 {
        return Err(Error::InvalidParameter("n_list must be increasing with n >= 2".into()));
    }
    let f = model.marginal_density(x0);
    let f2 = model.marginal_density_dd(x0);
    let base = RngStream::new(seed).fork(domain::CUMULANT);
    n_list
        .iter()
        .map(|&n| {
            let h = h_rule.h(n);
            let pt = DensityEvalPoint::new(x0, h)?;
            let values = kde_replications(model, n, pt, kernel, replications, &base.fork(n as u64))?;
            let m = replications as f64;
            let mean = values.iter().sum::<f64>() / m;
            let (mut s2, mut s4) = (0.0, 0.0);
            for v in &values {
                let d = (v - mean) * (v - mean);
                s2 += d;
                s4 += d * d;
            }
            let variance = s2 / (m - 1.0);
            let m4 = s4 / m;
            let variance_std_err = ((m4 - variance * variance).max(0.0) / m).sqrt();
            let scale = n as f64 * h / (f * kernel.nu2);
            Ok(CumulantRow {
                n,
                h,
                mean,
                mean_std_err: (variance / m).sqrt(),
                mean_expected: f + h * h * f2 * kernel.mu2 / 2.0,
                variance,
                variance_std_err,
                ratio: scale * variance,
                ratio_std_err: scale * variance_std_err,
                iid_ratio: variance_exact_iid(model, x0, h, kernel)? / (f * kernel.nu2),
            })
        })
        .collect()
}

pub fn write_cumulant_csv<W: Write>(rows: &[CumulantRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "n",
        "h",
        "mean",
        "mean_std_err",
        "mean_expected",
        "variance",
        "variance_std_err",
        "ratio",
        "ratio_std_err",
        "iid_ratio",
    ])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            g17(r.h),
            g17(r.mean),
            g17(r.mean_std_err),
            g17(r.mean_expected),
            g17(r.variance),
            g17(r.variance_std_err),
            g17(r.ratio),
            g17(r.ratio_std_err),
            g17(r.iid_ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}
