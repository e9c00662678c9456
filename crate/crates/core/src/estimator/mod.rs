//! The kink estimation pipeline on the rank scale: `κ̂_h` profiles, the
//! standardized scan, threshold detection, extrema localisation, the
//! zero-crossing search and the quantile back-transform.

mod config;
mod decompose;
mod pipeline;
mod profile;

pub use config::{
    default_bandwidth, BandwidthRole, EstimatorConfig, FMode, UpsilonMode, MAX_DEFAULT_BANDWIDTH,
    MIN_FINE_STEP,
};
pub use decompose::{decompose, Decomposition};
pub use pipeline::{
    detect_kinks, estimate, grid_between, localize, localize_values, rescale, zero_crossing,
    zero_crossing_values, Cluster, EstimateReport, Estimation, KinkEstimate, KinkRecord,
};
pub use profile::{
    kappa_hat, kappa_profile, scan_partition, upsilon, upsilon_oracle, upsilon_plugin,
    KappaProfile, PreparedData, PLUGIN_MIN_POINTS, UPSILON_FLOOR,
};
