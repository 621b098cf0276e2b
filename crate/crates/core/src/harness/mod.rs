//! Monte Carlo experiments: truth oracles, MSE benchmarks and cumulant checks.

pub mod config;
pub mod cumulant;
pub mod mse;
pub mod oracle;

pub use config::{default_c2_grid, default_k1_grid, log_grid, ExperimentConfig};
pub use cumulant::{cumulant_check, CumulantRow, HRule};
pub use mse::{
    draw_block_indices, mse_experiment, sensitivity_scan, CellRecord, CellStatus, CurvePoint, ExperimentSeeds,
    GridPoint, MseReport, MseStats, ScanParam, SensitivityCurve,
};
pub use oracle::{kde_bias_oracle, kde_replications, mean_var, true_cdf_oracle, BiasEstimate, OracleEstimate};
