use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{shared_kernel, KernelEval};
use crate::scalar::Scalar;
use crate::scenario::{Dataset, DesignSpec, ErrorLaw, Scenario};

use super::config::{BandwidthRole, EstimatorConfig, FMode, UpsilonMode};

/// Points needed in `(t - h, t + h)` for the plug-in variance.
pub const PLUGIN_MIN_POINTS: usize = 20;
/// Lower bound applied to every `υ`.
pub const UPSILON_FLOOR: f64 = 1e-8;

/// Responses ordered by their rank-scale position `F̃(X_i)`.
#[derive(Debug, Clone)]
pub struct PreparedData<T> {
    u: Vec<T>,
    y: Vec<T>,
}

impl<T: Scalar> PreparedData<T> {
    pub fn new(data: &Dataset<T>, mode: FMode) -> Result<Self> {
        let n = data.n();
        if n == 0 || data.y.len() != n {
            return Err(Error::InsufficientData("empty or ragged dataset".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        let u_raw: Vec<T> = match mode {
            FMode::Ranks => {
                order.sort_by(|&a, &b| data.x[a].partial_cmp(&data.x[b]).expect("finite x"));
                let inv_n = 1.0 / n as f64;
                let mut u = vec![T::zero(); n];
                for (pos, &i) in order.iter().enumerate() {
                    u[i] = T::of((pos as f64 + 0.5) * inv_n);
                }
                u
            }
            FMode::Oracle => {
                let u: Vec<T> = match (&data.latents, &data.scenario) {
                    (Some(l), _) => l.f_of_x.clone(),
                    (None, Some(s)) => data.x.iter().map(|x| T::of(s.true_cdf(x.f64()))).collect(),
                    (None, None) => return Err(Error::MissingLatent("F(X)")),
                };
                order.sort_by(|&a, &b| u[a].partial_cmp(&u[b]).expect("finite F"));
                u
            }
        };
        Ok(Self {
            u: order.iter().map(|&i| u_raw[i]).collect(),
            y: order.iter().map(|&i| data.y[i]).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn positions(&self) -> &[T] {
        &self.u
    }

    pub fn responses(&self) -> &[T] {
        &self.y
    }

    /// Indices with `|F̃ - t| <= h`.
    pub fn window(&self, t: T, h: T) -> Range<usize> {
        let lo = self.u.partition_point(|&v| v < t - h);
        let hi = self.u.partition_point(|&v| v <= t + h);
        lo..hi.max(lo)
    }

    /// `(n h^4)^{-1} Σ Y_i K_3((F̃_i - t)/h)`; `None` when the window is empty.
    pub fn kappa(&self, k: &KernelEval<T>, t: T, h: T) -> Option<T> {
        let w = self.window(t, h);
        if w.is_empty() {
            return None;
        }
        let sum: T = w.map(|i| self.y[i] * k.k3((self.u[i] - t) / h)).sum();
        let h2 = h * h;
        Some(sum / (T::of(self.n() as f64) * h2 * h2))
    }

    /// Mean and mean squared deviation of `Y` over the open window `(t-h, t+h)`.
    pub fn window_moments(&self, t: T, h: T) -> Result<(T, T)> {
        let lo = self.u.partition_point(|&v| v <= t - h);
        let hi = self.u.partition_point(|&v| v < t + h).max(lo);
        let count = hi - lo;
        if count < PLUGIN_MIN_POINTS {
            return Err(Error::InsufficientData(format!(
                "{count} points in window around {t}, need {PLUGIN_MIN_POINTS}"
            )));
        }
        let c = T::of(count as f64);
        let mean = self.y[lo..hi].iter().copied().sum::<T>() / c;
        let var = self.y[lo..hi]
            .iter()
            .map(|&v| (v - mean) * (v - mean))
            .sum::<T>()
            / c;
        Ok((mean, var))
    }
}

fn check_interior<T: Scalar>(t: T, h: T) -> Result<()> {
    if t > h && t < T::one() - h {
        Ok(())
    } else {
        Err(Error::Boundary {
            t: t.f64(),
            lo: h.f64(),
            hi: 1.0 - h.f64(),
        })
    }
}

/// Pointwise `κ̂_h(t)` with the bandwidth of `role`.
pub fn kappa_hat<T: Scalar>(
    data: &Dataset<T>,
    config: &EstimatorConfig<T>,
    role: BandwidthRole,
    t: T,
) -> Result<T> {
    config.validate()?;
    let h = config.bandwidth(role);
    check_interior(t, h)?;
    let prepared = PreparedData::new(data, config.f_mode)?;
    let k = shared_kernel(config.kernel_order)?.evaluator::<T>();
    Ok(prepared.kappa(&k, t, h).unwrap_or_else(T::zero))
}

/// Variance of the errors as drawn, folded into `σ_F^2` for the oracle `υ`.
fn error_variance(s: &Scenario) -> f64 {
    match s.design {
        DesignSpec::B {
            errors: ErrorLaw::Gaussian { variance },
            ..
        } => variance,
        _ => 1.0,
    }
}

/// Oracle `υ(t) = sqrt((σ_F^2(t) + μ_F^2(t)) ∫K_3^2)`.
pub fn upsilon_oracle(scenario: &Scenario, kernel_order: u32, t: f64) -> Result<f64> {
    let norm = shared_kernel(kernel_order)?.l2_norm_sq(3)?;
    let sigma = scenario.sigma_f(t)?;
    let mu = scenario.mu_f(t)?;
    Ok(
        ((sigma * sigma * error_variance(scenario) + mu * mu) * norm)
            .sqrt()
            .max(UPSILON_FLOOR),
    )
}

/// Plug-in `υ̂(t)` from the window mean and variance of `Y`.
pub fn upsilon_plugin<T: Scalar>(
    prepared: &PreparedData<T>,
    kernel_order: u32,
    t: T,
    h: T,
) -> Result<T> {
    let norm = T::of(shared_kernel(kernel_order)?.l2_norm_sq(3)?);
    let (mean, var) = prepared.window_moments(t, h)?;
    Ok(((var + mean * mean) * norm)
        .sqrt()
        .max(T::of(UPSILON_FLOOR)))
}

/// `υ(t)` in the configured mode.
pub fn upsilon<T: Scalar>(
    data: &Dataset<T>,
    config: &EstimatorConfig<T>,
    role: BandwidthRole,
    t: T,
) -> Result<T> {
    config.validate()?;
    let h = config.bandwidth(role);
    match config.upsilon_mode {
        UpsilonMode::Oracle => Ok(T::of(upsilon_oracle(
            data.scenario()?,
            config.kernel_order,
            t.f64(),
        )?)),
        UpsilonMode::Plugin => {
            let prepared = PreparedData::new(data, config.f_mode)?;
            upsilon_plugin(&prepared, config.kernel_order, t, h)
        }
    }
}

/// `κ̂`, `υ` and `𝒯 = sqrt(n h^7) κ̂ / υ` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaProfile<T> {
    pub bandwidth: T,
    pub grid: Vec<T>,
    pub kappa_hat: Vec<T>,
    pub upsilon: Vec<T>,
    pub t_stat: Vec<T>,
    /// Detection scan points `{j · 2h/r} ∩ (h, 1-h)`.
    pub partition: Vec<T>,
    pub m_n: usize,
    pub threshold: T,
    /// Grid points with an empty kernel window or too few points for the
    /// plug-in variance; their statistic is set to zero.
    pub warnings: usize,
}

/// Scan points `j · step` strictly inside `(h, 1-h)`.
pub fn scan_partition<T: Scalar>(config: &EstimatorConfig<T>) -> (Vec<T>, usize) {
    let h = config.bandwidth_detect;
    let m_n = (T::one() / (T::of(2.0) * h)).ceil().to_usize().unwrap_or(1);
    let step = config.scan_step();
    let points = (1..m_n * config.scan_refine)
        .map(|j| T::of(j as f64) * step)
        .filter(|&t| t > h && t < T::one() - h)
        .collect();
    (points, m_n)
}

/// Profile on `grid`, or on the scan partition when `grid` is `None`.
pub fn kappa_profile<T: Scalar>(
    data: &Dataset<T>,
    config: &EstimatorConfig<T>,
    role: BandwidthRole,
    grid: Option<&[T]>,
) -> Result<KappaProfile<T>> {
    config.validate()?;
    let prepared = PreparedData::new(data, config.f_mode)?;
    profile_prepared(&prepared, data.scenario.as_ref(), config, role, grid)
}

pub(crate) fn profile_prepared<T: Scalar>(
    prepared: &PreparedData<T>,
    scenario: Option<&Scenario>,
    config: &EstimatorConfig<T>,
    role: BandwidthRole,
    grid: Option<&[T]>,
) -> Result<KappaProfile<T>> {
    let h = config.bandwidth(role);
    let (partition, m_n) = scan_partition(config);
    let grid: Vec<T> = grid.map(<[T]>::to_vec).unwrap_or_else(|| partition.clone());
    for w in grid.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "profile grid must be strictly increasing".into(),
            ));
        }
    }
    for &t in &grid {
        check_interior(t, h)?;
    }
    if config.upsilon_mode == UpsilonMode::Oracle && scenario.is_none() {
        return Err(Error::MissingLatent("scenario"));
    }
    let k = shared_kernel(config.kernel_order)?.evaluator::<T>();
    let scale = (T::of(prepared.n() as f64) * h.powi(7)).sqrt();
    let mut out = KappaProfile {
        bandwidth: h,
        grid: grid.clone(),
        kappa_hat: Vec::with_capacity(grid.len()),
        upsilon: Vec::with_capacity(grid.len()),
        t_stat: Vec::with_capacity(grid.len()),
        partition,
        m_n,
        threshold: config.threshold(),
        warnings: 0,
    };
    for &t in &grid {
        let kappa = prepared.kappa(&k, t, h);
        let ups = match config.upsilon_mode {
            UpsilonMode::Oracle => Some(T::of(upsilon_oracle(
                scenario.expect("checked above"),
                config.kernel_order,
                t.f64(),
            )?)),
            UpsilonMode::Plugin => match upsilon_plugin(prepared, config.kernel_order, t, h) {
                Ok(u) => Some(u),
                Err(Error::InsufficientData(_)) => None,
                Err(e) => return Err(e),
            },
        };
        let (kappa, ups, stat) = match (kappa, ups) {
            (Some(kv), Some(u)) => (kv, u, scale * kv / u),
            (kv, u) => {
                out.warnings += 1;
                (
                    kv.unwrap_or_else(T::zero),
                    u.unwrap_or(T::of(UPSILON_FLOOR)),
                    T::zero(),
                )
            }
        };
        out.kappa_hat.push(kappa);
        out.upsilon.push(ups);
        out.t_stat.push(stat);
    }
    Ok(out)
}
