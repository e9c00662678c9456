use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{kappa_profile, BandwidthRole, EstimatorConfig};
use crate::scenario::{generate_dataset, DesignSpec, Scenario};
use crate::seeds::replication_seed;

use super::gumbel::{gumbel_cdf, gumbel_norming};
use super::stats::empirical_cdf_at;

/// Levels at which the scan maximum is compared with its limit law.
pub const DEFAULT_GUMBEL_POINTS: [f64; 4] = [-1.0, 0.0, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationPoint {
    pub x: f64,
    pub bound: f64,
    pub empirical: f64,
    pub theoretical: f64,
}

impl CalibrationPoint {
    pub fn gap(&self) -> f64 {
        (self.empirical - self.theoretical).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub n: usize,
    pub reps: usize,
    pub master_seed: u64,
    pub bandwidth: f64,
    pub m_n: usize,
    pub scan_points: usize,
    /// `sup_{t ∈ T_n} |𝒯(t)|` per replication.
    pub sup_stats: Vec<f64>,
    pub points: Vec<CalibrationPoint>,
    pub threshold: f64,
    pub false_alarm_rate: f64,
    /// Bandwidth-schedule diagnostics; nonempty when the large-deviation
    /// conditions look violated at this `n`.
    pub warnings: Vec<String>,
}

/// Left side of the bandwidth conditions behind the Gumbel limit.
pub fn evt_band_quantity(scenario: &Scenario, n: usize, h: f64, smoothness: u32) -> f64 {
    let lh = h.ln().abs();
    let nf = n as f64;
    let spec = scenario.lrd_component();
    let l = spec.slowly_varying.value(nf);
    let base =
        lh.powi(3) / (nf * h.powi(3)) + l * l * lh * lh / (nf.powf(spec.alpha) * h.powf(4.0 / 3.0));
    match scenario.design {
        DesignSpec::A { .. } => base,
        DesignSpec::B { .. } => {
            let q = smoothness.min(scenario.sigma_smoothness) as i32;
            base + h.powi(2 * q + 1) * nf
        }
    }
}

/// Null distribution of the scan maximum over the plain partition
/// `T_n = {2hj}`; any scan refinement in `config` is ignored.
pub fn run_null_calibration(
    scenario: &Scenario,
    n: usize,
    reps: usize,
    config: &EstimatorConfig<f64>,
    x_points: &[f64],
    master_seed: u64,
) -> Result<CalibrationResult> {
    let config = &EstimatorConfig {
        scan_refine: 1,
        ..*config
    };
    config.validate()?;
    super::rate::check_reps(reps, 1)?;
    if !scenario.mu.kinks().is_empty() {
        return Err(Error::UnsupportedScenario(
            "null calibration needs a kink-free μ".into(),
        ));
    }
    if scenario.is_assumption_a() && !scenario.sigma.is_constant() {
        return Err(Error::UnsupportedScenario(
            "null calibration under assumption A needs a constant scale".into(),
        ));
    }
    let h = config.bandwidth_detect;
    let probe = generate_dataset::<f64>(scenario, n, replication_seed(master_seed, 0, 0), false)?;
    let shape = kappa_profile(&probe, config, BandwidthRole::Detect, None)?;
    let m_n = shape.m_n;
    let bounds: Vec<(f64, f64)> = x_points
        .iter()
        .map(|&x| Ok((x, gumbel_norming(m_n, x)?)))
        .collect::<Result<_>>()?;
    if shape.partition.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no scan points inside (h, 1-h) for h = {h}"
        )));
    }

    let sup_stats: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let data = generate_dataset::<f64>(
                scenario,
                n,
                replication_seed(master_seed, 0, rep as u64),
                false,
            )?;
            let p = kappa_profile(&data, config, BandwidthRole::Detect, None)?;
            Ok(p.t_stat.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        })
        .collect::<Result<_>>()?;

    let mut warnings = Vec::new();
    let band = evt_band_quantity(scenario, n, h, config.smoothness());
    if band > 1.0 {
        warnings.push(format!(
            "bandwidth schedule quantity {band:.3} exceeds 1 at n = {n}, h = {h:.4}; the Gumbel limit may be far off"
        ));
    }
    if m_n < 10 {
        warnings.push(format!(
            "only {m_n} partition cells; the extreme-value limit is coarse"
        ));
    }
    let threshold = config.threshold();
    Ok(CalibrationResult {
        n,
        reps,
        master_seed,
        bandwidth: h,
        m_n,
        scan_points: shape.partition.len(),
        points: bounds
            .iter()
            .map(|&(x, bound)| CalibrationPoint {
                x,
                bound,
                empirical: empirical_cdf_at(&sup_stats, bound),
                theoretical: gumbel_cdf(x),
            })
            .collect(),
        false_alarm_rate: sup_stats.iter().filter(|&&s| s >= threshold).count() as f64
            / reps as f64,
        threshold,
        sup_stats,
        warnings,
    })
}
