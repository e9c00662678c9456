//! Causal long-range dependent linear processes
//! `ξ_i = μ_ξ + Σ_{j=0}^{M} c_j η_{i-j}` with `c_0 = 1`,
//! `c_j = j^{-(1+α)/2} L` and innovation variance chosen so `Var ξ_i = 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

/// Truncation used when none is given and the series is short.
pub const DEFAULT_TRUNCATION: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SlowlyVarying {
    Constant(f64),
}

impl SlowlyVarying {
    pub fn value(&self, _x: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant(c) => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Innovations {
    Gaussian,
    /// Centered uniform scaled to the innovation variance.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Truncation {
    /// `max(n, 2^14)` for a series of length `n`.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearProcessSpec {
    /// Memory parameter in `(0, 1]`; `1` is short range.
    pub alpha: f64,
    pub slowly_varying: SlowlyVarying,
    pub mean: f64,
    pub truncation: Truncation,
    pub innovations: Innovations,
}

impl LinearProcessSpec {
    pub fn gaussian(alpha: f64) -> Self {
        Self {
            alpha,
            slowly_varying: SlowlyVarying::Constant(1.0),
            mean: 0.0,
            truncation: Truncation::Auto,
            innovations: Innovations::Gaussian,
        }
    }

    pub fn with_truncation(mut self, m: usize) -> Self {
        self.truncation = Truncation::Fixed(m);
        self
    }

    pub fn with_mean(mut self, mean: f64) -> Self {
        self.mean = mean;
        self
    }

    pub fn with_innovations(mut self, innovations: Innovations) -> Self {
        self.innovations = innovations;
        self
    }

    /// Number of retained coefficients beyond `c_0` for a series of length `n`.
    pub fn truncation_for(&self, n: usize) -> usize {
        match self.truncation {
            Truncation::Auto => n.max(DEFAULT_TRUNCATION),
            Truncation::Fixed(m) => m,
        }
    }

    /// Same process with the truncation pinned to the value used for length `n`.
    pub fn resolved(&self, n: usize) -> Self {
        self.with_truncation(self.truncation_for(n))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "memory parameter {} not in (0, 1]",
                self.alpha
            )));
        }
        let SlowlyVarying::Constant(c) = self.slowly_varying;
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "slowly varying constant {c} must be positive"
            )));
        }
        if !self.mean.is_finite() {
            return Err(Error::InvalidParameter(
                "process mean must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// `c_0, ..., c_M` for the spec's truncation (`Auto` resolves to `2^14`).
pub fn ma_coefficients(spec: &LinearProcessSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    Ok(coefficients(spec, spec.truncation_for(0)))
}

fn coefficients(spec: &LinearProcessSpec, m: usize) -> Vec<f64> {
    let expo = -(1.0 + spec.alpha) / 2.0;
    std::iter::once(1.0)
        .chain((1..=m).map(|i| (i as f64).powf(expo) * spec.slowly_varying.value(i as f64)))
        .collect()
}

/// `σ_η = (Σ_{j=0}^{M} c_j^2)^{-1/2}`.
pub fn innovation_sd(spec: &LinearProcessSpec) -> Result<f64> {
    let c = ma_coefficients(spec)?;
    Ok(sd_from(&c))
}

fn sd_from(c: &[f64]) -> f64 {
    // sum smallest terms first
    c.iter().rev().map(|v| v * v).sum::<f64>().powf(-0.5)
}

#[derive(Debug, Clone)]
pub struct LrdSeries {
    pub values: Vec<f64>,
    pub spec: LinearProcessSpec,
    pub seed: Option<u64>,
    /// `η_{1-M}, ..., η_n` when retained.
    pub innovations: Option<Vec<f64>>,
}

impl LrdSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn draw_innovations<R: Rng + ?Sized>(
    kind: Innovations,
    sd: f64,
    count: usize,
    rng: &mut R,
) -> Vec<f64> {
    match kind {
        Innovations::Gaussian => (0..count)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                sd * z
            })
            .collect::<Vec<f64>>(),
        Innovations::Uniform => {
            let half = sd * 3f64.sqrt();
            (0..count).map(|_| rng.random_range(-half..half)).collect()
        }
    }
}

/// Simulates `n` values after a burn-in of `M` innovations, convolving by FFT.
pub fn simulate_lrd<R: Rng + ?Sized>(
    spec: &LinearProcessSpec,
    n: usize,
    rng: &mut R,
    keep_innovations: bool,
) -> Result<LrdSeries> {
    let (eta, c) = prepare(spec, n, rng)?;
    let values = fft_filter(&eta, &c, n)
        .into_iter()
        .map(|v| v + spec.mean)
        .collect();
    Ok(LrdSeries {
        values,
        spec: spec.resolved(n),
        seed: None,
        innovations: keep_innovations.then_some(eta),
    })
}

/// [`simulate_lrd`] with a `ChaCha8` stream seeded from `seed`.
pub fn simulate_lrd_seeded(spec: &LinearProcessSpec, n: usize, seed: u64) -> Result<LrdSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = simulate_lrd(spec, n, &mut rng, false)?;
    s.seed = Some(seed);
    Ok(s)
}

/// Reference implementation by direct sliding dot product, `O(nM)`.
pub fn simulate_lrd_direct<R: Rng + ?Sized>(
    spec: &LinearProcessSpec,
    n: usize,
    rng: &mut R,
) -> Result<LrdSeries> {
    let (eta, c) = prepare(spec, n, rng)?;
    let m = c.len() - 1;
    let values = (0..n)
        .map(|i| {
            spec.mean
                + c.iter()
                    .enumerate()
                    .map(|(j, cj)| cj * eta[i + m - j])
                    .sum::<f64>()
        })
        .collect();
    Ok(LrdSeries {
        values,
        spec: spec.resolved(n),
        seed: None,
        innovations: Some(eta),
    })
}

fn prepare<R: Rng + ?Sized>(
    spec: &LinearProcessSpec,
    n: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("series length must be >= 1".into()));
    }
    let m = spec.truncation_for(n);
    let c = coefficients(spec, m);
    let sd = sd_from(&c);
    let eta = draw_innovations(spec.innovations, sd, m + n, rng);
    Ok((eta, c))
}

/// Outputs `k = M .. M+n-1` of the linear convolution `c * eta`. Those
/// indices never wrap in a circular convolution of length `>= eta.len()`.
fn fft_filter(eta: &[f64], c: &[f64], n: usize) -> Vec<f64> {
    let m = c.len() - 1;
    let size = eta.len().next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut a = padded(eta, size);
    let mut b = padded(c, size);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    inv.process(&mut a);
    let scale = 1.0 / size as f64;
    a[m..m + n].iter().map(|z| z.re * scale).collect()
}

fn padded(v: &[f64], size: usize) -> Vec<Complex<f64>> {
    let mut out = vec![Complex::new(0.0, 0.0); size];
    for (o, &x) in out.iter_mut().zip(v) {
        o.re = x;
    }
    out
}

/// Autocovariances `γ_0, ..., γ_M` of the truncated process.
pub fn autocovariances(spec: &LinearProcessSpec) -> Result<Vec<f64>> {
    let c = ma_coefficients(spec)?;
    let var = sd_from(&c).powi(2);
    let m = c.len() - 1;
    let size = (2 * (m + 1)).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let (fwd, inv) = (
        planner.plan_fft_forward(size),
        planner.plan_fft_inverse(size),
    );
    let mut a = padded(&c, size);
    fwd.process(&mut a);
    for z in a.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    inv.process(&mut a);
    let scale = var / size as f64;
    Ok(a[..=m].iter().map(|z| z.re * scale).collect())
}

/// Second-order constants of the process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LrdConstants {
    pub sigma_eta_sq: f64,
    /// `Cov(ξ_0, ξ_k) ~ C_0^2 k^{-α} L^2(k)`.
    pub c0sq: f64,
    /// `Var(Σ ξ_i) ~ C_1^2 n^{2-α} L^2(n)`.
    pub c1sq: f64,
    /// `Var(Σ ξ_i^2) ~ C_2^2 n^{2-2α} L^4(n)`, only for `α < 1/2`.
    pub c2sq: Option<f64>,
    /// `Var(Σ ξ_i^2) ~ C_3^2 n`, only for `α > 1/2` and Gaussian innovations.
    pub c3sq: Option<f64>,
    /// `s_X = sqrt(1 - σ_η^2)`.
    pub s_x: f64,
    pub alpha: f64,
}

impl LrdConstants {
    pub fn c2sq(&self) -> Result<f64> {
        self.c2sq
            .ok_or_else(|| Error::Regime(format!("C2^2 requires alpha < 1/2, got {}", self.alpha)))
    }

    pub fn c3sq(&self) -> Result<f64> {
        self.c3sq.ok_or_else(|| {
            Error::Regime(format!(
                "C3^2 requires alpha > 1/2 and Gaussian innovations, got alpha = {}",
                self.alpha
            ))
        })
    }
}

/// `∫_0^∞ (x^2 + x)^{-(1+α)/2} dx` by quadrature after substitutions that
/// remove the endpoint singularities on `[0, 1]` and `[1, ∞)`.
pub fn covariance_integral(alpha: f64, tol: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Regime(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let e = (1.0 + alpha) / 2.0;
    // [0, 1]: x = v^{2/(1-α)}
    let p = 2.0 / (1.0 - alpha);
    let near = adaptive_simpson(|v: f64| p * (1.0 + v.powf(p)).powf(-e), 0.0, 1.0, tol / 2.0)?;
    // [1, ∞): x = 1/w, w = v^{1/α}
    let far = adaptive_simpson(
        |v: f64| (1.0 + v.powf(1.0 / alpha)).powf(-e) / alpha,
        0.0,
        1.0,
        tol / 2.0,
    )?;
    Ok(near + far)
}

pub fn lrd_constants(spec: &LinearProcessSpec, quad_tol: f64) -> Result<LrdConstants> {
    spec.validate()?;
    let alpha = spec.alpha;
    if alpha >= 1.0 {
        return Err(Error::Regime(
            "C1^2 = 2 C0^2 / ((1 - α)(2 - α)) is undefined for α = 1".into(),
        ));
    }
    let c = ma_coefficients(spec)?;
    let sigma_eta_sq = sd_from(&c).powi(2);
    let c0sq = sigma_eta_sq * covariance_integral(alpha, quad_tol)?;
    let c1sq = 2.0 * c0sq / ((1.0 - alpha) * (2.0 - alpha));
    let c2sq =
        (alpha < 0.5).then(|| 4.0 * c0sq * c0sq / ((1.0 - 2.0 * alpha) * (2.0 - 2.0 * alpha)));
    let c3sq = if alpha > 0.5 && spec.innovations == Innovations::Gaussian {
        let gamma = autocovariances(spec)?;
        // Gaussian: Cov(ξ_0^2, ξ_i^2) = 2 ρ_i^2, Var ξ_0^2 = 2
        let tail: f64 = gamma[1..].iter().rev().map(|r| 2.0 * r * r).sum();
        Some(2.0 * gamma[0] * gamma[0] + 2.0 * tail)
    } else {
        None
    };
    Ok(LrdConstants {
        sigma_eta_sq,
        c0sq,
        c1sq,
        c2sq,
        c3sq,
        s_x: (1.0 - sigma_eta_sq).max(0.0).sqrt(),
        alpha,
    })
}
