use serde::Serialize;

use crate::error::Result;
use crate::estimator::{
    default_bandwidth, BandwidthRole, EstimatorConfig, FMode, UpsilonMode, MAX_DEFAULT_BANDWIDTH,
};

/// How a bandwidth is chosen for each sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BandwidthRule {
    /// The default schedule for the role.
    Auto,
    /// The same value at every `n`.
    Fixed(f64),
    /// `factor` times the default schedule.
    Scaled(f64),
}

/// Estimator settings instantiated per sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfigTemplate {
    pub kernel_order: u32,
    pub detect: BandwidthRule,
    pub zero: BandwidthRule,
    pub f_mode: FMode,
    pub upsilon_mode: UpsilonMode,
    pub coarse_step: f64,
    /// `None` uses the smoothness `2k + 1`.
    pub fine_exponent: Option<f64>,
    pub threshold_inflation: f64,
    pub scan_refine: usize,
}

impl Default for ConfigTemplate {
    fn default() -> Self {
        Self {
            kernel_order: 1,
            detect: BandwidthRule::Auto,
            zero: BandwidthRule::Auto,
            f_mode: FMode::Ranks,
            upsilon_mode: UpsilonMode::Plugin,
            coarse_step: 0.1,
            fine_exponent: None,
            threshold_inflation: 1.0,
            scan_refine: 4,
        }
    }
}

impl ConfigTemplate {
    pub fn for_n(&self, n: usize) -> Result<EstimatorConfig<f64>> {
        let s = 2 * self.kernel_order + 1;
        let pick = |rule: BandwidthRule, role| -> Result<f64> {
            Ok(match rule {
                BandwidthRule::Auto => default_bandwidth(n, s, role)?.min(MAX_DEFAULT_BANDWIDTH),
                BandwidthRule::Fixed(h) => h,
                BandwidthRule::Scaled(c) => c * default_bandwidth(n, s, role)?,
            })
        };
        let config = EstimatorConfig {
            kernel_order: self.kernel_order,
            bandwidth_detect: pick(self.detect, BandwidthRole::Detect)?,
            bandwidth_zero: pick(self.zero, BandwidthRole::Zero)?,
            f_mode: self.f_mode,
            upsilon_mode: self.upsilon_mode,
            coarse_step: self.coarse_step,
            fine_exponent: self.fine_exponent.unwrap_or(s as f64),
            threshold_inflation: self.threshold_inflation,
            scan_refine: self.scan_refine,
        };
        config.validate()?;
        Ok(config)
    }
}
