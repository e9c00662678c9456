use kinkscan::experiments::{least_squares, median_quartiles};
use kinkscan::lrd::LinearProcessSpec;
use kinkscan::scenario::{
    generate_dataset, Dataset, DesignLaw, DesignSpec, EmpiricalDistribution, ErrorLaw, Kink,
    KinkFunction, ScaleSpec, Scenario, SmoothPart,
};
use proptest::prelude::*;
use rayon::prelude::*;

fn abs_kink(design: DesignSpec, theta: f64) -> Scenario {
    Scenario::new(
        KinkFunction::new(vec![Kink { theta, jump: 2.0 }], SmoothPart::Zero, 3).unwrap(),
        ScaleSpec::Constant(0.1),
        design,
    )
    .unwrap()
}

/// Slope of the log median of `|Q_n(1/2) - Q(1/2)|` against `log n`.
fn median_quantile_error_slope(scenario: &Scenario, master: u64) -> f64 {
    let levels: Vec<usize> = (10..=14).map(|e| 1usize << e).collect();
    let target = scenario.true_quantile(0.5).unwrap();
    let medians: Vec<f64> = levels
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let errors: Vec<f64> = (0..200u64)
                .into_par_iter()
                .map(|rep| {
                    let seed = master + 1000 * i as u64 + rep;
                    let d: Dataset<f64> = generate_dataset(scenario, n, seed, false).unwrap();
                    let q = d.empirical().unwrap().quantile(0.5).unwrap();
                    (q - target).abs()
                })
                .collect();
            median_quartiles(&errors).unwrap().0
        })
        .collect();
    let x: Vec<f64> = levels.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = medians.iter().map(|m| m.ln()).collect();
    least_squares(&x, &y).unwrap().0
}

#[test]
fn quantile_process_rate_under_independent_design() {
    let s = abs_kink(
        DesignSpec::A {
            law: DesignLaw::Uniform01,
            errors: LinearProcessSpec::gaussian(0.6),
        },
        0.5,
    );
    let slope = median_quantile_error_slope(&s, 100);
    assert!((slope + 0.5).abs() <= 0.15, "slope {slope}");
}

#[test]
fn quantile_process_rate_under_dependent_design() {
    let alpha = 0.6;
    let s = abs_kink(
        DesignSpec::B {
            design: LinearProcessSpec::gaussian(alpha),
            errors: ErrorLaw::Gaussian { variance: 1.0 },
        },
        0.0,
    );
    let slope = median_quantile_error_slope(&s, 200);
    assert!((slope + alpha / 2.0).abs() <= 0.2, "slope {slope}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantile_is_a_generalized_inverse(sample in prop::collection::vec(-10.0f64..10.0, 1..200)) {
        let e = EmpiricalDistribution::new(&sample).unwrap();
        for i in 1..10 {
            let p = i as f64 / 10.0;
            let q = e.quantile(p).unwrap();
            prop_assert!(e.cdf(q) >= p);
            prop_assert!(sample.contains(&q));
        }
        let max = sample.iter().cloned().fold(f64::MIN, f64::max);
        prop_assert_eq!(e.quantile(1.0).unwrap(), max);
        prop_assert_eq!(e.cdf(max), 1.0);
    }

    #[test]
    fn empirical_cdf_is_a_nondecreasing_step(
        sample in prop::collection::vec(-10.0f64..10.0, 1..200),
        mut probes in prop::collection::vec(-12.0f64..12.0, 2..40),
    ) {
        let e = EmpiricalDistribution::new(&sample).unwrap();
        probes.sort_by(f64::total_cmp);
        let n = sample.len() as f64;
        for w in probes.windows(2) {
            prop_assert!(e.cdf(w[0]) <= e.cdf(w[1]));
        }
        for &p in &probes {
            let v = e.cdf(p) * n;
            prop_assert!((v - v.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn derivative_jumps_equal_the_kink_sizes(
        theta in 0.1f64..0.9,
        jump in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
        amplitude in 0.0f64..0.5,
    ) {
        let mu = KinkFunction::new(
            vec![Kink { theta, jump }],
            SmoothPart::Sine { amplitude, frequency: 1.0 },
            3,
        )
        .unwrap();
        let delta = 1e-5;
        let d = mu.derivative(theta + delta) - mu.derivative(theta - delta);
        // the sine slope changes by at most (2π)^2 a · 2δ across the gap
        prop_assert!((d - jump).abs() <= 1e-4 + 80.0 * amplitude * delta);
    }

    #[test]
    fn uniform_design_composes_to_the_identity(t in 0.01f64..0.99, theta in 0.1f64..0.9) {
        let s = abs_kink(
            DesignSpec::A { law: DesignLaw::Uniform01, errors: LinearProcessSpec::gaussian(0.6) },
            theta,
        );
        prop_assert!((s.mu_f(t).unwrap() - (t - theta).abs()).abs() < 1e-12);
        prop_assert!((s.true_quantile(t).unwrap() - t).abs() < 1e-12);
    }
}
