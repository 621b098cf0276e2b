use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{kde, DensityEvalPoint, KernelSpec};
use crate::process::StationaryProcess;
use crate::rng::RngStream;

/// Monte Carlo estimate of P(T_h ≤ y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub p: f64,
    pub std_err: f64,
    pub replications: usize,
}

/// Seed of the series used by replication `r` under a base stream.
pub fn replication_seed(base: &RngStream, r: usize) -> u64 {
    base.fork(r as u64).seed()
}

fn check_oracle_r(oracle_r: usize) -> Result<()> {
    if oracle_r < 100 {
        return Err(Error::InvalidParameter(format!(
            "oracle_R must be >= 100, got {oracle_r}"
        )));
    }
    Ok(())
}

/// f̂_h(x0) for each of `replications` independent series, in replication order.
pub fn kde_replications(
    model: &dyn StationaryProcess,
    n: usize,
    pt: DensityEvalPoint,
    kernel: &KernelSpec,
    replications: usize,
    base: &RngStream,
) -> Result<Vec<f64>> {
    (0..replications)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |buf, r| {
                model.fill(replication_seed(base, r), buf);
                kde(buf, pt, kernel)
            },
        )
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn true_cdf_oracle(
    model: &dyn StationaryProcess,
    n: usize,
    x0: f64,
    y: f64,
    h: f64,
    kernel: &KernelSpec,
    oracle_r: usize,
    seed: u64,
) -> Result<OracleEstimate> {
    check_oracle_r(oracle_r)?;
    let pt = DensityEvalPoint::new(x0, h)?;
    let f = model.marginal_density(x0);
    let scale = (n as f64 * h).sqrt();
    let values = kde_replications(model, n, pt, kernel, oracle_r, &RngStream::new(seed))?;
    let count = values.iter().filter(|&&v| scale * (v - f) <= y).count();
    let p = count as f64 / oracle_r as f64;
    Ok(OracleEstimate {
        p,
        std_err: (p * (1.0 - p) / oracle_r as f64).sqrt(),
        replications: oracle_r,
    })
}

/// Mean of f̂_h(x0) − f(x0) with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasEstimate {
    pub bias: f64,
    pub std_err: f64,
}

pub fn kde_bias_oracle(
    model: &dyn StationaryProcess,
    n: usize,
    x0: f64,
    h: f64,
    kernel: &KernelSpec,
    oracle_r: usize,
    seed: u64,
) -> Result<BiasEstimate> {
    check_oracle_r(oracle_r)?;
    let pt = DensityEvalPoint::new(x0, h)?;
    let f = model.marginal_density(x0);
    let values = kde_replications(model, n, pt, kernel, oracle_r, &RngStream::new(seed))?;
    let (mean, var) = mean_var(&values);
    Ok(BiasEstimate {
        bias: mean - f,
        std_err: (var / oracle_r as f64).sqrt(),
    })
}

/// Sample mean and unbiased variance, reduced in index order.
pub fn mean_var(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, ss / (m - 1.0).max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::ProcessModel;

    #[test]
    fn oracle_is_deterministic_and_bounded() {
        let model = ProcessModel::reference();
        let spec = KernelSpec::epanechnikov();
        let a = true_cdf_oracle(&model, 50, 1.0, 0.15, 0.625, &spec, 500, 9).unwrap();
        let b = true_cdf_oracle(&model, 50, 1.0, 0.15, 0.625, &spec, 500, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.p > 0.0 && a.p < 1.0);
        assert!(true_cdf_oracle(&model, 50, 1.0, 0.15, 0.625, &spec, 99, 9).is_err());
    }

    #[test]
    fn std_err_scaling() {
        let model = ProcessModel::reference();
        let spec = KernelSpec::epanechnikov();
        let a = true_cdf_oracle(&model, 100, 1.0, 0.15, 0.625, &spec, 20_000, 1).unwrap();
        let b = true_cdf_oracle(&model, 100, 1.0, 0.15, 0.625, &spec, 40_000, 1).unwrap();
        let ratio = a.std_err / b.std_err;
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn mean_var_small() {
        let (m, v) = mean_var(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert_eq!(v, 1.0);
    }
}
