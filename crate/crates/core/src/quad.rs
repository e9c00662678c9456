//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` with adaptive
/// Simpson and Richardson correction.
pub fn adaptive_simpson<T: Scalar>(f: impl Fn(T) -> T, a: T, b: T, tol: T) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let two = T::of(2.0);
    let m = (a + b) / two;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    let mut failed = false;
    let value = recurse(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut failed);
    if failed || !value.is_finite() {
        return Err(Error::Numeric(format!(
            "adaptive Simpson failed to reach tolerance {tol} on [{a}, {b}]"
        )));
    }
    Ok(value)
}

/// Integrates piecewise, splitting `[a, b]` at every breakpoint strictly
/// inside it. The tolerance is shared evenly among the pieces.
pub fn integrate_split<T: Scalar>(
    f: impl Fn(T) -> T,
    a: T,
    b: T,
    breaks: &[T],
    tol: T,
) -> Result<T> {
    let mut cuts: Vec<T> = breaks.iter().copied().filter(|&c| c > a && c < b).collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    cuts.dedup();
    let pieces = T::from_usize(cuts.len() + 1).expect("small count");
    let mut total = T::zero();
    let mut lo = a;
    for hi in cuts.into_iter().chain(std::iter::once(b)) {
        total = total + adaptive_simpson(&f, lo, hi, tol / pieces)?;
        lo = hi;
    }
    Ok(total)
}

#[inline]
fn simpson<T: Scalar>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::of(6.0) * (fa + T::of(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T: Scalar>(
    f: &impl Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
    failed: &mut bool,
) -> T {
    let two = T::of(2.0);
    let m = (a + b) / two;
    let (lm, rm) = ((a + m) / two, (m + b) / two);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // below the floating point resolution of the interval further halving is useless
    if delta.abs() <= T::of(15.0) * tol || m <= a || m >= b {
        return left + right + delta / T::of(15.0);
    }
    if depth == 0 {
        *failed = true;
        return left + right + delta / T::of(15.0);
    }
    recurse(f, a, m, fa, flm, fm, left, tol / two, depth - 1, failed)
        + recurse(f, m, b, fm, frm, fb, right, tol / two, depth - 1, failed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_and_transcendental_integrals() {
        let v = adaptive_simpson(|x: f64| x.powi(7) - 3.0 * x * x, -1.0, 2.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, (256.0 - 1.0) / 8.0 - 9.0, epsilon = 1e-10);
        let s = adaptive_simpson(f64::sin, 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert_abs_diff_eq!(s, 2.0, epsilon = 1e-11);
    }

    #[test]
    fn split_handles_kinks() {
        let v = integrate_split(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], 1e-12).unwrap();
        assert_abs_diff_eq!(v, 0.5 * 0.09 + 0.5 * 0.49, epsilon = 1e-13);
    }

    #[test]
    fn works_in_single_precision() {
        let v = adaptive_simpson(|x: f32| x * x, 0.0f32, 1.0, 1e-5).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        assert!(adaptive_simpson(|x: f64| 1.0 / x, 0.0, 1.0, 1e-10).is_err());
    }
}
