use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::estimate;
use crate::scenario::{generate_dataset, DesignSpec, Scenario};
use crate::seeds::replication_seed;

use super::stats::{least_squares, median_quartiles};
use super::template::ConfigTemplate;

/// Outcome of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRep {
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    /// `|θ̂ - θ|`, or the censoring value on a miss.
    pub error: f64,
    pub theta_hat: Option<f64>,
    pub missed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateLevel {
    pub n: usize,
    pub median: f64,
    pub lower_quartile: f64,
    pub upper_quartile: f64,
    pub misses: usize,
    pub bandwidth_detect: f64,
    pub bandwidth_zero: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateStudyResult {
    pub levels: Vec<RateLevel>,
    pub slope: f64,
    pub intercept: f64,
    pub target_slope: f64,
    pub reps: usize,
    pub master_seed: u64,
    pub censor_value: f64,
    pub replications: Vec<RateRep>,
}

/// `-s/(2s+1)` under (A); `max(-s/(2s+1), -α_x/2)` under (B).
pub fn target_rate_slope(scenario: &Scenario, smoothness: u32) -> f64 {
    let s = smoothness as f64;
    let base = -s / (2.0 * s + 1.0);
    match &scenario.design {
        DesignSpec::A { .. } => base,
        DesignSpec::B { design, .. } => base.max(-design.alpha / 2.0),
    }
}

pub(crate) fn check_reps(reps: usize, min: usize) -> Result<()> {
    if reps < min {
        return Err(Error::InvalidParameter(format!(
            "need at least {min} replications, got {reps}"
        )));
    }
    Ok(())
}

/// Simulates, estimates and records `|θ̂ - θ|` for every `(n, rep)`, then
/// fits the log-log slope of the median error against `n`.
pub fn run_rate_study(
    scenario: &Scenario,
    n_list: &[usize],
    reps: usize,
    template: &ConfigTemplate,
    master_seed: u64,
) -> Result<RateStudyResult> {
    if n_list.len() < 4 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "rate study needs at least 4 increasing sample sizes".into(),
        ));
    }
    check_reps(reps, 100)?;
    let kinks = scenario.mu.kinks();
    if kinks.len() != 1 {
        return Err(Error::InvalidParameter(format!(
            "rate study needs exactly one kink, scenario has {}",
            kinks.len()
        )));
    }
    let theta = kinks[0].theta;
    let censor = scenario.design_half_width();
    let mut levels = Vec::with_capacity(n_list.len());
    let mut replications = Vec::with_capacity(n_list.len() * reps);
    for (level, &n) in n_list.iter().enumerate() {
        let config = template.for_n(n)?;
        let outcomes: Vec<RateRep> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let seed = replication_seed(master_seed, level as u64, rep as u64);
                let data = generate_dataset::<f64>(scenario, n, seed, false)?;
                // stage failures (no extrema, interval at the boundary) count as misses
                let nearest = estimate(&data, &config).ok().and_then(|e| {
                    e.kinks
                        .iter()
                        .map(|k| k.theta_hat)
                        .min_by(|a, b| (a - theta).abs().total_cmp(&(b - theta).abs()))
                });
                Ok(RateRep {
                    n,
                    rep,
                    seed,
                    error: nearest.map_or(censor, |t| (t - theta).abs()),
                    theta_hat: nearest,
                    missed: nearest.is_none(),
                })
            })
            .collect::<Result<_>>()?;
        let misses = outcomes.iter().filter(|r| r.missed).count();
        if 2 * misses > reps {
            return Err(Error::StudyInvalid(format!(
                "{misses} of {reps} replications missed the kink at n = {n} (h_d = {:.4}, h_z = {:.4})",
                config.bandwidth_detect, config.bandwidth_zero
            )));
        }
        let errors: Vec<f64> = outcomes.iter().map(|r| r.error).collect();
        let (median, q1, q3) = median_quartiles(&errors)?;
        if !(median > 0.0) {
            return Err(Error::StudyInvalid(format!(
                "median error is zero at n = {n}"
            )));
        }
        levels.push(RateLevel {
            n,
            median,
            lower_quartile: q1,
            upper_quartile: q3,
            misses,
            bandwidth_detect: config.bandwidth_detect,
            bandwidth_zero: config.bandwidth_zero,
        });
        replications.extend(outcomes);
    }
    let x: Vec<f64> = levels.iter().map(|l| (l.n as f64).ln()).collect();
    let y: Vec<f64> = levels.iter().map(|l| l.median.ln()).collect();
    let (slope, intercept) = least_squares(&x, &y)?;
    Ok(RateStudyResult {
        levels,
        slope,
        intercept,
        target_slope: target_rate_slope(scenario, 2 * template.kernel_order + 1),
        reps,
        master_seed,
        censor_value: censor,
        replications,
    })
}
