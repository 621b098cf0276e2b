//! Closed-form tuning mathematics.

pub mod curves;
pub mod gfun;
pub mod normal;
pub mod rates;
pub mod selectors;

pub use curves::{g_curve_export, q_exponent, CurveKind, CurveTable};
pub use gfun::{
    b_max, b_min, beta1, beta1_cached, beta1_residual, beta2, beta2_cached, beta2_residual, g0, g1, g2, gamma0,
    min_order_exponent, GammaGConfig, Infimum,
};
pub use normal::{normal_approx, std_normal_cdf, variance_exact_iid, NormalApproxInputs};
pub use rates::{rate_rows, rate_table, MethodRate, RateRanking, RateRegime};
pub use selectors::{
    ebc_optimal_expo, ebc_optimal_poly, nbc_optimal_expo, nbc_optimal_poly, nbc_subsampling_expo, practical_choice_ebc,
    practical_window, round_up, uns_optimal_expo, uns_optimal_poly, ExponentsUsed, Multipliers, RawSelection,
    SelectorRegime, TuningSelection,
};
