use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::shared_kernel;
use crate::scalar::Scalar;
use crate::scenario::{Dataset, EmpiricalDistribution};

use super::config::{BandwidthRole, EstimatorConfig, FMode};
use super::profile::{profile_prepared, KappaProfile, PreparedData};

/// Run of scan points above the threshold, with the widened search range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster<T> {
    pub points: Vec<T>,
    pub t_range: (T, T),
    pub max_abs_tstat: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KinkEstimate<T> {
    pub cluster_range: (T, T),
    /// `t̂_*`, the argmin of `κ̂` on the coarse grid.
    pub t_hat_star_low: T,
    /// `t̂^*`, the argmax of `κ̂` on the coarse grid.
    pub t_hat_star_high: T,
    pub lambda_hat: T,
    pub theta_hat: T,
    pub max_tstat: T,
    /// `+1` when the argmin precedes the argmax (positive jump).
    pub jump_sign: i8,
}

impl<T: Scalar> KinkEstimate<T> {
    /// Endpoints of `Â_h` in increasing order.
    pub fn interval(&self) -> (T, T) {
        let (a, b) = (self.t_hat_star_low, self.t_hat_star_high);
        (a.min(b), a.max(b))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimation<T> {
    pub kinks: Vec<KinkEstimate<T>>,
    pub threshold: T,
    pub bandwidth_detect: T,
    pub bandwidth_zero: T,
    pub f_mode: FMode,
    pub profile: KappaProfile<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KinkRecord {
    pub lambda_hat: f64,
    pub theta_hat: f64,
    pub t_low: f64,
    pub t_high: f64,
    pub max_tstat: f64,
    pub jump_sign: i8,
}

/// Serializable summary of an [`Estimation`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub kinks: Vec<KinkRecord>,
    pub threshold: f64,
    pub bandwidth_detect: f64,
    pub bandwidth_zero: f64,
    pub f_mode: FMode,
}

impl<T: Scalar> Estimation<T> {
    pub fn report(&self) -> EstimateReport {
        EstimateReport {
            kinks: self
                .kinks
                .iter()
                .map(|k| {
                    let (lo, hi) = k.interval();
                    KinkRecord {
                        lambda_hat: k.lambda_hat.f64(),
                        theta_hat: k.theta_hat.f64(),
                        t_low: lo.f64(),
                        t_high: hi.f64(),
                        max_tstat: k.max_tstat.f64(),
                        jump_sign: k.jump_sign,
                    }
                })
                .collect(),
            threshold: self.threshold.f64(),
            bandwidth_detect: self.bandwidth_detect.f64(),
            bandwidth_zero: self.bandwidth_zero.f64(),
            f_mode: self.f_mode,
        }
    }
}

/// Maximal runs of consecutive scan points with `|𝒯| >= threshold`, each
/// widened by `2h` (clipped to `[h, 1-h]`); overlapping ranges are merged.
pub fn detect_kinks<T: Scalar>(profile: &KappaProfile<T>) -> Vec<Cluster<T>> {
    let h = profile.bandwidth;
    let two_h = T::of(2.0) * h;
    let stat_at = |t: T| {
        profile
            .grid
            .binary_search_by(|g| g.partial_cmp(&t).expect("finite grid"))
            .ok()
            .map(|i| profile.t_stat[i])
    };
    let mut runs: Vec<Cluster<T>> = Vec::new();
    let mut current: Option<Cluster<T>> = None;
    for &t in &profile.partition {
        match stat_at(t) {
            Some(stat) if stat.abs() >= profile.threshold => {
                let c = current.get_or_insert_with(|| Cluster {
                    points: Vec::new(),
                    t_range: (t, t),
                    max_abs_tstat: T::zero(),
                });
                c.points.push(t);
                c.t_range.1 = t;
                c.max_abs_tstat = c.max_abs_tstat.max(stat.abs());
            }
            _ => runs.extend(current.take()),
        }
    }
    runs.extend(current);
    let mut merged: Vec<Cluster<T>> = Vec::new();
    for mut c in runs {
        c.t_range = (
            (c.t_range.0 - two_h).max(h),
            (c.t_range.1 + two_h).min(T::one() - h),
        );
        match merged.last_mut() {
            Some(prev) if c.t_range.0 <= prev.t_range.1 => {
                prev.points.extend(c.points);
                prev.t_range.1 = prev.t_range.1.max(c.t_range.1);
                prev.max_abs_tstat = prev.max_abs_tstat.max(c.max_abs_tstat);
            }
            _ => merged.push(c),
        }
    }
    merged
}

/// Points `lo + j step` in `[lo, hi]` lying strictly inside `(h, 1-h)`.
pub fn grid_between<T: Scalar>(lo: T, hi: T, step: T, h: T) -> Vec<T> {
    let count = ((hi - lo) / step).floor().to_usize().unwrap_or(0);
    (0..=count)
        .map(|j| lo + T::of(j as f64) * step)
        .filter(|&t| t > h && t < T::one() - h)
        .collect()
}

/// `(argmin, argmax)` of `values` over `grid`, ties toward smaller `t`.
pub fn localize_values<T: Scalar>(grid: &[T], values: &[T]) -> Result<(T, T)> {
    if grid.is_empty() || grid.len() != values.len() {
        return Err(Error::NoExtrema);
    }
    let (mut imin, mut imax) = (0, 0);
    for (i, &v) in values.iter().enumerate() {
        if v < values[imin] {
            imin = i;
        }
        if v > values[imax] {
            imax = i;
        }
    }
    if !(values[imax] > values[imin]) {
        return Err(Error::NoExtrema);
    }
    Ok((grid[imin], grid[imax]))
}

/// Extrema of `κ̂_{h_d}` on the coarse grid over the cluster's range.
pub fn localize<T: Scalar>(
    data: &Dataset<T>,
    config: &EstimatorConfig<T>,
    cluster: &Cluster<T>,
) -> Result<(T, T)> {
    config.validate()?;
    let prepared = PreparedData::new(data, config.f_mode)?;
    localize_prepared(&prepared, config, cluster)
}

fn localize_prepared<T: Scalar>(
    prepared: &PreparedData<T>,
    config: &EstimatorConfig<T>,
    cluster: &Cluster<T>,
) -> Result<(T, T)> {
    let h = config.bandwidth_detect;
    let grid = grid_between(
        cluster.t_range.0,
        cluster.t_range.1,
        config.coarse_step * h,
        h,
    );
    let k = shared_kernel(config.kernel_order)?.evaluator::<T>();
    let values: Vec<T> = grid
        .iter()
        .map(|&t| prepared.kappa(&k, t, h).unwrap_or_else(T::zero))
        .collect();
    localize_values(&grid, &values)
}

/// Argmin of `|values|` over `grid`, ties toward smaller `t`; `None`
/// entries (empty windows) are skipped.
pub fn zero_crossing_values<T: Scalar>(grid: &[T], values: &[Option<T>]) -> Option<T> {
    let mut best: Option<(T, T)> = None;
    for (&t, v) in grid.iter().zip(values) {
        if let Some(v) = v {
            if best.is_none_or(|(_, b)| v.abs() < b) {
                best = Some((t, v.abs()));
            }
        }
    }
    best.map(|(t, _)| t)
}

/// `λ̂ = argmin |κ̂_{h_z}|` on the fine grid over `interval`.
pub fn zero_crossing<T: Scalar>(
    data: &Dataset<T>,
    config: &EstimatorConfig<T>,
    interval: (T, T),
) -> Result<T> {
    config.validate()?;
    let prepared = PreparedData::new(data, config.f_mode)?;
    zero_crossing_prepared(&prepared, config, interval)
}

fn zero_crossing_prepared<T: Scalar>(
    prepared: &PreparedData<T>,
    config: &EstimatorConfig<T>,
    interval: (T, T),
) -> Result<T> {
    let h = config.bandwidth_zero;
    let (lo, hi) = (interval.0.min(interval.1), interval.0.max(interval.1));
    let grid = grid_between(lo, hi, config.fine_step(), h);
    if grid.is_empty() {
        return Err(Error::Boundary {
            t: lo.f64(),
            lo: h.f64(),
            hi: 1.0 - h.f64(),
        });
    }
    let k = shared_kernel(config.kernel_order)?.evaluator::<T>();
    let values: Vec<Option<T>> = grid.iter().map(|&t| prepared.kappa(&k, t, h)).collect();
    zero_crossing_values(&grid, &values).ok_or_else(|| {
        Error::InsufficientData("no observations near the zero-crossing interval".into())
    })
}

/// `θ̂ = Q_n(λ̂)`.
pub fn rescale<T: Scalar>(data: &Dataset<T>, lambda_hat: T) -> Result<T> {
    data.empirical()?.quantile(lambda_hat)
}

/// Full pipeline: scan, detect, localise, zero-crossing, rescale.
pub fn estimate<T: Scalar>(
    data: &Dataset<T>,
    config: &EstimatorConfig<T>,
) -> Result<Estimation<T>> {
    config.validate()?;
    if data.n() < 64 {
        return Err(Error::InsufficientData(format!("n = {} < 64", data.n())));
    }
    let prepared = PreparedData::new(data, config.f_mode)?;
    let empirical: EmpiricalDistribution<T> = data.empirical()?;
    let profile = profile_prepared(
        &prepared,
        data.scenario.as_ref(),
        config,
        BandwidthRole::Detect,
        None,
    )?;
    let mut kinks = Vec::new();
    for cluster in detect_kinks(&profile) {
        let (t_min, t_max) = localize_prepared(&prepared, config, &cluster)?;
        let lambda_hat = zero_crossing_prepared(&prepared, config, (t_min, t_max))?;
        kinks.push(KinkEstimate {
            cluster_range: cluster.t_range,
            t_hat_star_low: t_min,
            t_hat_star_high: t_max,
            lambda_hat,
            theta_hat: empirical.quantile(lambda_hat)?,
            max_tstat: cluster.max_abs_tstat,
            jump_sign: if t_min < t_max { 1 } else { -1 },
        });
    }
    Ok(Estimation {
        kinks,
        threshold: profile.threshold,
        bandwidth_detect: config.bandwidth_detect,
        bandwidth_zero: config.bandwidth_zero,
        f_mode: config.f_mode,
        profile,
    })
}
