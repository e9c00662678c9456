use crate::error::{Error, Result};
use crate::scenario::normal_cdf;

/// Quantile with linear interpolation between order statistics.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `(median, lower quartile, upper quartile)`.
pub fn median_quartiles(values: &[f64]) -> Result<(f64, f64, f64)> {
    if values.is_empty() {
        return Err(Error::InsufficientData("no values".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok((
        quantile_sorted(&v, 0.5),
        quantile_sorted(&v, 0.25),
        quantile_sorted(&v, 0.75),
    ))
}

/// Ordinary least squares `y = intercept + slope x`.
pub fn least_squares(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InsufficientData("need at least two points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("regressor is constant".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Kolmogorov–Smirnov distance between the sample and `N(0, variance)`.
pub fn ks_distance_normal(values: &[f64], variance: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InsufficientData("no values".into()));
    }
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "variance {variance} must be positive"
        )));
    }
    let sd = variance.sqrt();
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    Ok(v.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = normal_cdf(x / sd);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    }))
}

/// Fraction of `values` at or below `bound`.
pub fn empirical_cdf_at(values: &[f64], bound: f64) -> f64 {
    values.iter().filter(|&&v| v <= bound).count() as f64 / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quartiles_of_small_sample() {
        let (m, q1, q3) = median_quartiles(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!((m, q1, q3), (3.0, 2.0, 4.0));
    }

    #[test]
    fn exact_line_fit() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 - 0.3 * v).collect();
        let (s, i) = least_squares(&x, &y).unwrap();
        assert_abs_diff_eq!(s, -0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(i, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn ks_of_single_point_at_median() {
        assert_abs_diff_eq!(
            ks_distance_normal(&[0.0], 1.0).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert!(ks_distance_normal(&[0.0], 0.0).is_err());
    }
}
