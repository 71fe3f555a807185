//! Numerical primitives: Student-t quantiles, seeded random streams,
//! samplers for the experiment distributions and summary statistics.

mod quantile;
mod rng;
pub mod sampling;
pub mod special;
mod summary;

pub use quantile::{
    critical_value, t_cdf, t_pdf, t_quantile, t_upper_quantile, t_upper_tail, ucb_critical_value,
    TQuantileQuery, MIN_CRITICAL_TAIL, NORMAL_FALLBACK_DOF,
};
pub use rng::{derive_seed, mix64, RngStream};
pub use sampling::sample_bivariate_gaussian_additive;
pub use summary::{confidence_band, summarize, Band, SampleSummary};
