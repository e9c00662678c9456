use kinkscan::experiments::least_squares;
use kinkscan::lrd::{
    autocovariances, innovation_sd, lrd_constants, ma_coefficients, simulate_lrd_seeded,
    LinearProcessSpec,
};
use proptest::prelude::*;
use rayon::prelude::*;

fn prefix_sums(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

#[test]
fn variance_of_partial_sums_grows_like_n_to_two_minus_alpha() {
    let alpha = 0.5;
    let spec = LinearProcessSpec::gaussian(alpha).with_truncation(1 << 16);
    let levels: Vec<usize> = (10..=16).map(|e| 1usize << e).collect();
    let reps = 100;
    // prefixes of one stationary series share the law of shorter series
    let squares: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let s = simulate_lrd_seeded(&spec, 1 << 16, 9000 + rep).unwrap();
            let sums = prefix_sums(&s.values);
            levels.iter().map(|&n| sums[n - 1].powi(2)).collect()
        })
        .collect();
    let x: Vec<f64> = levels.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = (0..levels.len())
        .map(|j| (squares.iter().map(|s| s[j]).sum::<f64>() / reps as f64).ln())
        .collect();
    let (slope, _) = least_squares(&x, &y).unwrap();
    assert!((slope - (2.0 - alpha)).abs() <= 0.15, "slope {slope}");
}

/// Standard deviation of `n^{-1} Σ ξ_i^2` for a Gaussian series, from the
/// exact autocovariances: `Var = 2 n^{-2} Σ_{i,j} γ_{i-j}^2`.
fn second_moment_sd(spec: &LinearProcessSpec, n: usize) -> f64 {
    let gamma = autocovariances(spec).unwrap();
    let sum: f64 = (0..n.min(gamma.len()))
        .map(|k| {
            let w = if k == 0 { n } else { 2 * (n - k) };
            w as f64 * gamma[k] * gamma[k]
        })
        .sum();
    (2.0 * sum).sqrt() / n as f64
}

#[test]
fn long_series_has_unit_variance() {
    let n = 1 << 16;
    for (i, alpha) in [0.3, 0.6, 0.9].into_iter().enumerate() {
        let spec = LinearProcessSpec::gaussian(alpha).with_truncation(1 << 16);
        let s = simulate_lrd_seeded(&spec, n, 31 + i as u64).unwrap();
        let var = s.values.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let sd = second_moment_sd(&spec, n);
        // at alpha = 0.3 one series fluctuates by more than 0.05
        let tol = 0.05f64.max(3.0 * sd);
        assert!(
            (var - 1.0).abs() <= tol,
            "alpha {alpha}: variance {var}, sd {sd}"
        );
    }
}

#[test]
fn autocovariance_decays_like_lag_to_minus_alpha() {
    let alpha = 0.6;
    let n = 1 << 14;
    let spec = LinearProcessSpec::gaussian(alpha);
    let lags: Vec<usize> = (4..=9).map(|e| 1usize << e).collect();
    let reps = 50;
    let per_rep: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let v = simulate_lrd_seeded(&spec, n, 500 + rep).unwrap().values;
            lags.iter()
                .map(|&k| {
                    v[..n - k]
                        .iter()
                        .zip(&v[k..])
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                        / (n - k) as f64
                })
                .collect()
        })
        .collect();
    let x: Vec<f64> = lags.iter().map(|&k| (k as f64).ln()).collect();
    let y: Vec<f64> = (0..lags.len())
        .map(|j| (per_rep.iter().map(|r| r[j]).sum::<f64>() / reps as f64).ln())
        .collect();
    let (slope, _) = least_squares(&x, &y).unwrap();
    assert!((slope + alpha).abs() <= 0.2, "slope {slope}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn coefficients_are_positive_and_decreasing(alpha in 0.05f64..1.0, m in 0usize..400) {
        let c = ma_coefficients(&LinearProcessSpec::gaussian(alpha).with_truncation(m)).unwrap();
        prop_assert_eq!(c.len(), m + 1);
        prop_assert_eq!(c[0], 1.0);
        for w in c.windows(2) {
            prop_assert!(w[1] > 0.0 && w[1] <= w[0]);
        }
    }

    #[test]
    fn innovation_scale_gives_unit_marginal_variance(alpha in 0.05f64..1.0, m in 0usize..2000) {
        let spec = LinearProcessSpec::gaussian(alpha).with_truncation(m);
        let sd = innovation_sd(&spec).unwrap();
        let c = ma_coefficients(&spec).unwrap();
        let var = sd * sd * c.iter().map(|v| v * v).sum::<f64>();
        prop_assert!((var - 1.0).abs() < 1e-12);
        let gamma = autocovariances(&spec).unwrap();
        prop_assert!((gamma[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constants_are_nonnegative(alpha in 0.05f64..0.95) {
        let k = lrd_constants(&LinearProcessSpec::gaussian(alpha), 1e-9).unwrap();
        prop_assert!(k.c0sq > 0.0 && k.c1sq > 0.0);
        prop_assert!(k.s_x >= 0.0 && k.s_x < 1.0);
        prop_assert_eq!(k.c2sq.is_some(), alpha < 0.5);
        prop_assert_eq!(k.c3sq.is_some(), alpha > 0.5);
    }

    #[test]
    fn regeneration_is_bit_identical(alpha in 0.1f64..1.0, n in 1usize..300, seed in any::<u64>()) {
        let spec = LinearProcessSpec::gaussian(alpha).with_truncation(64);
        let a = simulate_lrd_seeded(&spec, n, seed).unwrap();
        let b = simulate_lrd_seeded(&spec, n, seed).unwrap();
        prop_assert_eq!(a.values, b.values);
    }
}
