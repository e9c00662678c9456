//! Monte Carlo harnesses: convergence rates of `θ̂`, the extreme-value
//! calibration of the scan, and the limit laws of `κ̂_h(t)`.
//!
//! Every replication draws from a seed derived from the master seed and its
//! `(level, rep)` index, so results do not depend on scheduling.

mod clt;
mod gumbel;
mod null;
mod rate;
mod stats;
mod template;

pub use clt::{hermite_h1, run_clt_study, upsilon_star, CltRegime, CltResult, CLT_QUAD_TOL};
pub use gumbel::{gumbel_cdf, gumbel_inflation, gumbel_norming, gumbel_quantile};
pub use null::{
    evt_band_quantity, run_null_calibration, CalibrationPoint, CalibrationResult,
    DEFAULT_GUMBEL_POINTS,
};
pub use rate::{run_rate_study, target_rate_slope, RateLevel, RateRep, RateStudyResult};
pub use stats::{
    empirical_cdf_at, ks_distance_normal, least_squares, median_quartiles, quantile_sorted,
};
pub use template::{BandwidthRule, ConfigTemplate};
