use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How design points are mapped to the rank scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FMode {
    /// True `F(X_i)`, from latents or the scenario.
    Oracle,
    /// `(i - 0.5)/n` at the sorted position of `X_i`.
    Ranks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UpsilonMode {
    Oracle,
    Plugin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BandwidthRole {
    Detect,
    Zero,
}

/// Smallest fine-grid step used by the zero-crossing search.
pub const MIN_FINE_STEP: f64 = 1e-6;

/// Upper cap on default bandwidths.
pub const MAX_DEFAULT_BANDWIDTH: f64 = 0.45;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorConfig<T> {
    pub kernel_order: u32,
    pub bandwidth_detect: T,
    pub bandwidth_zero: T,
    pub f_mode: FMode,
    pub upsilon_mode: UpsilonMode,
    /// Coarse localisation step as a multiple of the detection bandwidth.
    pub coarse_step: T,
    /// Fine step is `h_z^fine_exponent`.
    pub fine_exponent: T,
    pub threshold_inflation: T,
    /// The scan grid has spacing `2h / scan_refine`; `1` is the plain
    /// partition `{2hj}`.
    pub scan_refine: usize,
}

impl<T: Scalar> EstimatorConfig<T> {
    /// Defaults for a sample of size `n` and kernel order `k`; bandwidths are
    /// capped at [`MAX_DEFAULT_BANDWIDTH`] so small samples stay valid.
    pub fn for_sample_size(n: usize, kernel_order: u32) -> Result<Self> {
        let s = 2 * kernel_order + 1;
        let cap = |role| default_bandwidth(n, s, role).map(|h| T::of(h.min(MAX_DEFAULT_BANDWIDTH)));
        Ok(Self {
            kernel_order,
            bandwidth_detect: cap(BandwidthRole::Detect)?,
            bandwidth_zero: cap(BandwidthRole::Zero)?,
            f_mode: FMode::Ranks,
            upsilon_mode: UpsilonMode::Plugin,
            coarse_step: T::of(0.1),
            fine_exponent: T::of(s as f64),
            threshold_inflation: T::one(),
            scan_refine: 4,
        })
    }

    pub fn smoothness(&self) -> u32 {
        2 * self.kernel_order + 1
    }

    pub fn bandwidth(&self, role: BandwidthRole) -> T {
        match role {
            BandwidthRole::Detect => self.bandwidth_detect,
            BandwidthRole::Zero => self.bandwidth_zero,
        }
    }

    pub fn fine_step(&self) -> T {
        self.bandwidth_zero
            .powf(self.fine_exponent)
            .max(T::of(MIN_FINE_STEP))
    }

    /// Spacing of the detection scan.
    pub fn scan_step(&self) -> T {
        T::of(2.0) * self.bandwidth_detect / T::of(self.scan_refine as f64)
    }

    /// `inflation * sqrt(2 |log(scan step)|)`; reduces to `sqrt(2|log 2h|)`
    /// on the plain partition.
    pub fn threshold(&self) -> T {
        self.threshold_inflation * (T::of(2.0) * self.scan_step().ln().abs()).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=64).contains(&self.kernel_order) {
            return Err(Error::InvalidOrder(self.kernel_order as i64));
        }
        let half = T::of(0.5);
        for (name, h) in [
            ("detect", self.bandwidth_detect),
            ("zero", self.bandwidth_zero),
        ] {
            if !(h > T::zero() && h < half) {
                return Err(Error::InvalidParameter(format!(
                    "{name} bandwidth {h} not in (0, 1/2)"
                )));
            }
        }
        if !(self.coarse_step > T::zero() && self.coarse_step <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "coarse step factor {} not in (0, 1]",
                self.coarse_step
            )));
        }
        if !(self.fine_exponent >= T::one() && self.fine_exponent.is_finite()) {
            return Err(Error::InvalidParameter("fine exponent must be >= 1".into()));
        }
        if !(self.threshold_inflation > T::zero() && self.threshold_inflation.is_finite()) {
            return Err(Error::InvalidParameter(
                "threshold inflation must be positive".into(),
            ));
        }
        if self.scan_refine == 0 {
            return Err(Error::InvalidParameter(
                "scan refinement must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Zero-crossing role: `n^{-1/(2s+1)}`. Detection role: `n^{-5/21}`, the
/// midpoint exponent of the admissible window `(n^{-1/3}, n^{-1/7})`.
pub fn default_bandwidth(n: usize, s: u32, role: BandwidthRole) -> Result<f64> {
    if n < 64 {
        return Err(Error::InsufficientData(format!("n = {n} < 64")));
    }
    if s < 3 {
        return Err(Error::InvalidParameter(format!("smoothness {s} < 3")));
    }
    let n = n as f64;
    Ok(match role {
        BandwidthRole::Zero => n.powf(-1.0 / (2.0 * s as f64 + 1.0)),
        BandwidthRole::Detect => {
            let lo = n.powf(-1.0 / 3.0);
            let hi = n.powf(-1.0 / 7.0);
            n.powf(-(1.0 / 3.0 + 1.0 / 7.0) / 2.0).clamp(lo, hi)
        }
    })
}
