//! Hybrid block bootstrap for kernel density estimation under strong mixing.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod format;
pub mod harness;
pub mod kernel;
pub mod process;
pub mod quadrature;
pub mod resample;
pub mod rng;
pub mod tuning;

pub use error::{Error, Result};
pub use kernel::{
    kde, kernel_eval, kernel_moments, t_statistic, DensityEvalPoint, KernelKind, KernelSpec, Provenance,
    TimeSeriesSample,
};
pub use process::{MixingProfile, ProcessModel, StationaryProcess, TrueDensity};
pub use resample::{
    block_stats, bootstrap_cdf, conditional_mean, draw_t_star, enumerate_fstar, enumerate_t_star, make_ebc_params,
    make_nbc_params, make_uns_params, BlockStats, BootstrapParams, CdfEstimate, ExactLaw, Method, PreparedStatistic,
};
pub use rng::RngStream;
