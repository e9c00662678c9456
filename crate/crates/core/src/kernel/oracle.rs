use crate::error::{Error, Result};
use crate::quad::integrate_split;
use crate::scalar::Scalar;

use super::KinkKernel;

/// A kink of `μ_F` on the rank scale: location `λ` and first-derivative jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuKink<T> {
    pub location: T,
    pub jump: T,
}

/// Smoothed third derivative `κ_h(t)` split into the localisation term
/// `L_h(t) = h^{-2} Σ K_1((λ - t)/h) [μ_F'](λ)` and the remainder `J_h(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaOracle<T> {
    pub kappa: T,
    pub localisation: T,
    pub remainder: T,
}

/// `κ_h(t) = h^{-4} ∫_0^1 K_3((x - t)/h) μ_F(x) dx` by adaptive quadrature
/// split at the kinks, with absolute accuracy `quad_tol` on `κ_h`.
pub fn kappa_oracle<T: Scalar>(
    kernel: &KinkKernel,
    mu_f: impl Fn(T) -> T,
    kinks: &[MuKink<T>],
    h: T,
    t: T,
    quad_tol: T,
) -> Result<KappaOracle<T>> {
    let half = T::of(0.5);
    if !(h > T::zero() && h < half) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth {h} not in (0, 1/2)"
        )));
    }
    if !(t > h && t < T::one() - h) {
        return Err(Error::Boundary {
            t: t.f64(),
            lo: h.f64(),
            hi: 1.0 - h.f64(),
        });
    }
    let k = kernel.evaluator::<T>();
    // substitute x = t + h u so the integral runs over u in [-1, 1]
    let breaks: Vec<T> = kinks.iter().map(|kk| (kk.location - t) / h).collect();
    let h3 = h * h * h;
    let integral = integrate_split(
        |u| k.value(3, u) * mu_f(t + h * u),
        -T::one(),
        T::one(),
        &breaks,
        quad_tol * h3,
    )?;
    let kappa = integral / h3;
    let localisation = kinks
        .iter()
        .map(|kk| k.value(1, (kk.location - t) / h) * kk.jump)
        .fold(T::zero(), |a, b| a + b)
        / (h * h);
    Ok(KappaOracle {
        kappa,
        localisation,
        remainder: kappa - localisation,
    })
}
