//! Data-generating models: regression functions with kinks, scale
//! functions, and the two dependence set-ups (i.i.d. design with LRD errors,
//! LRD Gaussian design with i.i.d. errors).

mod dataset;
mod distribution;
mod empirical;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::MuKink;
use crate::lrd::{Innovations, LinearProcessSpec};

pub use dataset::{generate_dataset, Dataset, Latents};
pub use distribution::{normal_cdf, normal_pdf, normal_quantile};
pub use empirical::{empirical_cdf, empirical_quantile, EmpiricalDistribution};

/// A kink `(a/2) |x - θ|` contributing first-derivative jump `a` at `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kink {
    pub theta: f64,
    pub jump: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SmoothPart {
    Zero,
    /// `amplitude * sin(2π frequency x)`
    Sine {
        amplitude: f64,
        frequency: f64,
    },
    /// `Σ c_i x^i`
    Polynomial(Vec<f64>),
}

impl SmoothPart {
    pub fn eval(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `m`-th derivative in closed form.
    pub fn derivative(&self, x: f64, m: u32) -> f64 {
        match self {
            SmoothPart::Zero => 0.0,
            SmoothPart::Sine {
                amplitude,
                frequency,
            } => {
                let w = 2.0 * PI * frequency;
                amplitude * w.powi(m as i32) * (w * x + m as f64 * PI / 2.0).sin()
            }
            SmoothPart::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(m as usize)
                .map(|(i, ci)| {
                    let falling: f64 = (0..m).map(|r| (i as u32 - r) as f64).product();
                    ci * falling * x.powi((i as u32 - m) as i32)
                })
                .sum(),
        }
    }
}

/// Regression function `μ(x) = Σ_j (a_j/2)|x - θ_j| + smooth(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KinkFunction {
    kinks: Vec<Kink>,
    pub smooth: SmoothPart,
    pub smoothness: u32,
}

impl KinkFunction {
    pub fn new(mut kinks: Vec<Kink>, smooth: SmoothPart, smoothness: u32) -> Result<Self> {
        if smoothness < 3 {
            return Err(Error::InvalidParameter(format!(
                "smoothness {smoothness} < 3"
            )));
        }
        if kinks
            .iter()
            .any(|k| k.jump == 0.0 || !k.jump.is_finite() || !k.theta.is_finite())
        {
            return Err(Error::InvalidParameter(
                "kink jumps must be finite and nonzero".into(),
            ));
        }
        kinks.sort_by(|a, b| a.theta.total_cmp(&b.theta));
        if kinks.windows(2).any(|w| w[0].theta == w[1].theta) {
            return Err(Error::InvalidParameter(
                "kink locations must be distinct".into(),
            ));
        }
        Ok(Self {
            kinks,
            smooth,
            smoothness,
        })
    }

    /// Function without kinks.
    pub fn smooth(smooth: SmoothPart) -> Self {
        Self {
            kinks: Vec::new(),
            smooth,
            smoothness: 3,
        }
    }

    pub fn kinks(&self) -> &[Kink] {
        &self.kinks
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.kinks
            .iter()
            .map(|k| 0.5 * k.jump * (x - k.theta).abs())
            .sum::<f64>()
            + self.smooth.eval(x)
    }

    /// Analytic first derivative; at a kink the right derivative.
    pub fn derivative(&self, x: f64) -> f64 {
        self.kinks
            .iter()
            .map(|k| 0.5 * k.jump * if x >= k.theta { 1.0 } else { -1.0 })
            .sum::<f64>()
            + self.smooth.derivative(x, 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ScaleSpec {
    /// `σ(x) = σ_0`; `σ_0 = 0` gives noiseless data.
    Constant(f64),
    /// `σ(x) = base + amplitude sin(2π frequency x)` with `base > |amplitude|`.
    SineBounded {
        base: f64,
        amplitude: f64,
        frequency: f64,
    },
}

impl ScaleSpec {
    pub fn eval(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    pub fn derivative(&self, x: f64, m: u32) -> f64 {
        match *self {
            ScaleSpec::Constant(s) => {
                if m == 0 {
                    s
                } else {
                    0.0
                }
            }
            ScaleSpec::SineBounded {
                base,
                amplitude,
                frequency,
            } => {
                let part = SmoothPart::Sine {
                    amplitude,
                    frequency,
                }
                .derivative(x, m);
                if m == 0 {
                    base + part
                } else {
                    part
                }
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, ScaleSpec::Constant(_))
            || matches!(self, ScaleSpec::SineBounded { amplitude, .. } if *amplitude == 0.0)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ScaleSpec::Constant(s) if s >= 0.0 && s.is_finite() => Ok(()),
            ScaleSpec::SineBounded {
                base,
                amplitude,
                frequency,
            } if base.is_finite() && frequency.is_finite() && base > amplitude.abs() => Ok(()),
            _ => Err(Error::InvalidParameter(format!(
                "scale {self:?} is not bounded away from 0 and infinity"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DesignLaw {
    Uniform01,
    /// Beta(p, q) on `[0, 1]`.
    Beta {
        p: f64,
        q: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ErrorLaw {
    Gaussian {
        variance: f64,
    },
    /// Centered uniform with unit variance.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DesignSpec {
    /// i.i.d. design, LRD errors.
    A {
        law: DesignLaw,
        errors: LinearProcessSpec,
    },
    /// LRD Gaussian design, i.i.d. errors.
    B {
        design: LinearProcessSpec,
        errors: ErrorLaw,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub mu: KinkFunction,
    pub sigma: ScaleSpec,
    /// Smoothness `r` of the scale function.
    pub sigma_smoothness: u32,
    pub design: DesignSpec,
}

impl Scenario {
    pub fn new(mu: KinkFunction, sigma: ScaleSpec, design: DesignSpec) -> Result<Self> {
        let s = Self {
            mu,
            sigma,
            sigma_smoothness: 3,
            design,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.sigma.validate()?;
        if self.sigma_smoothness < 3 {
            return Err(Error::InvalidParameter(
                "scale smoothness must be >= 3".into(),
            ));
        }
        match &self.design {
            DesignSpec::A { law, errors } => {
                errors.validate()?;
                if let DesignLaw::Beta { p, q } = law {
                    if !(*p >= 1.0 && *q >= 1.0 && p.is_finite() && q.is_finite()) {
                        return Err(Error::UnsupportedScenario(format!(
                            "beta design ({p}, {q}) needs p, q >= 1 for a bounded density"
                        )));
                    }
                }
            }
            DesignSpec::B { design, errors } => {
                design.validate()?;
                if design.innovations != Innovations::Gaussian {
                    return Err(Error::UnsupportedScenario(
                        "LRD design must have Gaussian innovations".into(),
                    ));
                }
                if let ErrorLaw::Gaussian { variance } = errors {
                    if !(*variance > 0.0 && variance.is_finite()) {
                        return Err(Error::InvalidParameter(
                            "error variance must be positive".into(),
                        ));
                    }
                }
            }
        }
        for k in self.mu.kinks() {
            self.check_interior(k.theta)?;
        }
        Ok(())
    }

    fn check_interior(&self, theta: f64) -> Result<()> {
        let inside = match &self.design {
            DesignSpec::A { .. } => theta > 0.0 && theta < 1.0,
            DesignSpec::B { .. } => theta.is_finite(),
        };
        if inside {
            Ok(())
        } else {
            Err(Error::DegenerateKink(theta))
        }
    }

    pub fn is_assumption_a(&self) -> bool {
        matches!(self.design, DesignSpec::A { .. })
    }

    /// Memory parameter of whichever component is LRD.
    pub fn lrd_component(&self) -> &LinearProcessSpec {
        match &self.design {
            DesignSpec::A { errors, .. } => errors,
            DesignSpec::B { design, .. } => design,
        }
    }

    pub fn true_cdf(&self, x: f64) -> f64 {
        match &self.design {
            DesignSpec::A { law, .. } => distribution::law_cdf(law, x),
            DesignSpec::B { design, .. } => normal_cdf(x - design.mean),
        }
    }

    pub fn true_pdf(&self, x: f64) -> f64 {
        match &self.design {
            DesignSpec::A { law, .. } => distribution::law_pdf(law, x),
            DesignSpec::B { design, .. } => normal_pdf(x - design.mean),
        }
    }

    pub fn true_quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile level {p} not in (0, 1)")));
        }
        Ok(match &self.design {
            DesignSpec::A { law, .. } => distribution::law_quantile(law, p),
            DesignSpec::B { design, .. } => design.mean + normal_quantile(p),
        })
    }

    /// `λ_j = F(θ_j)` for every kink.
    pub fn kink_images(&self) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.mu.kinks().len());
        for k in self.mu.kinks() {
            self.check_interior(k.theta)?;
            let lambda = self.true_cdf(k.theta);
            if !(lambda > 0.0 && lambda < 1.0) {
                return Err(Error::DegenerateKink(k.theta));
            }
            out.push(lambda);
        }
        Ok(out)
    }

    /// Kinks of `μ_F = μ ∘ Q` on the rank scale, jump `a / f(θ)`.
    pub fn mu_f_kinks(&self) -> Result<Vec<MuKink<f64>>> {
        let lambdas = self.kink_images()?;
        Ok(self
            .mu
            .kinks()
            .iter()
            .zip(lambdas)
            .map(|(k, l)| MuKink {
                location: l,
                jump: k.jump / self.true_pdf(k.theta),
            })
            .collect())
    }

    fn check_unit(t: f64) -> Result<()> {
        if t > 0.0 && t < 1.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("rank-scale point {t} not in (0, 1)")))
        }
    }

    pub fn mu_f(&self, t: f64) -> Result<f64> {
        Self::check_unit(t)?;
        Ok(self.mu.eval(self.true_quantile(t)?))
    }

    pub fn sigma_f(&self, t: f64) -> Result<f64> {
        Self::check_unit(t)?;
        Ok(self.sigma.eval(self.true_quantile(t)?))
    }

    /// `m`-th derivative of `σ_F = σ ∘ Q`; closed form for constant scale or
    /// uniform design, central differences with step `1e-4 min(t, 1-t)`
    /// otherwise.
    pub fn sigma_f_derivative(&self, t: f64, m: u32) -> Result<f64> {
        Self::check_unit(t)?;
        if m > self.sigma_smoothness {
            return Err(Error::Domain(format!(
                "derivative order {m} exceeds scale smoothness {}",
                self.sigma_smoothness
            )));
        }
        if m > 0 && self.sigma.is_constant() {
            return Ok(0.0);
        }
        if let DesignSpec::A {
            law: DesignLaw::Uniform01,
            ..
        } = self.design
        {
            return Ok(self.sigma.derivative(t, m));
        }
        if m == 0 {
            return self.sigma_f(t);
        }
        let step = 1e-4 * t.min(1.0 - t);
        let mut acc = 0.0;
        for k in 0..=m {
            let binom: f64 = (0..k).map(|r| (m - r) as f64 / (r + 1) as f64).product();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let at = t + (m as f64 / 2.0 - k as f64) * step;
            acc += sign * binom * self.sigma.eval(self.true_quantile(at)?);
        }
        Ok(acc / step.powi(m as i32))
    }

    /// Half-width of the design support used to censor missed detections;
    /// for the unbounded Gaussian design, half the central 95% range.
    pub fn design_half_width(&self) -> f64 {
        match &self.design {
            DesignSpec::A { .. } => 0.5,
            DesignSpec::B { .. } => normal_quantile(0.975),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn uniform_scenario(kinks: Vec<Kink>, sigma: ScaleSpec) -> Scenario {
        Scenario::new(
            KinkFunction::new(kinks, SmoothPart::Zero, 3).unwrap(),
            sigma,
            DesignSpec::A {
                law: DesignLaw::Uniform01,
                errors: LinearProcessSpec::gaussian(0.6),
            },
        )
        .unwrap()
    }

    fn gaussian_scenario(kinks: Vec<Kink>) -> Scenario {
        Scenario::new(
            KinkFunction::new(kinks, SmoothPart::Zero, 3).unwrap(),
            ScaleSpec::Constant(1.0),
            DesignSpec::B {
                design: LinearProcessSpec::gaussian(0.6),
                errors: ErrorLaw::Gaussian { variance: 1.0 },
            },
        )
        .unwrap()
    }

    #[test]
    fn derivative_jump_at_each_kink() {
        let mu = KinkFunction::new(
            vec![
                Kink {
                    theta: 0.3,
                    jump: 1.5,
                },
                Kink {
                    theta: 0.7,
                    jump: -2.0,
                },
            ],
            SmoothPart::Sine {
                amplitude: 0.05,
                frequency: 1.0,
            },
            5,
        )
        .unwrap();
        let d = 1e-5;
        let h = 1e-7;
        let slope = |x: f64| (mu.eval(x + h) - mu.eval(x - h)) / (2.0 * h);
        for k in mu.kinks() {
            let fd = slope(k.theta + d) - slope(k.theta - d);
            assert!((fd - k.jump).abs() < 1e-4, "{fd}");
            let exact = mu.derivative(k.theta + d) - mu.derivative(k.theta - d);
            assert!((exact - k.jump).abs() < 1e-4, "{exact}");
        }
    }

    #[test]
    fn kink_function_validation() {
        assert!(KinkFunction::new(
            vec![Kink {
                theta: 0.5,
                jump: 0.0
            }],
            SmoothPart::Zero,
            3
        )
        .is_err());
        assert!(KinkFunction::new(vec![], SmoothPart::Zero, 2).is_err());
        let dup = vec![
            Kink {
                theta: 0.5,
                jump: 1.0,
            },
            Kink {
                theta: 0.5,
                jump: 2.0,
            },
        ];
        assert!(KinkFunction::new(dup, SmoothPart::Zero, 3).is_err());
    }

    #[test]
    fn smooth_part_derivatives() {
        let p = SmoothPart::Polynomial(vec![1.0, 2.0, 3.0, 4.0]);
        assert_abs_diff_eq!(p.derivative(2.0, 0), 1.0 + 4.0 + 12.0 + 32.0);
        assert_abs_diff_eq!(p.derivative(2.0, 2), 6.0 + 24.0 * 2.0);
        assert_abs_diff_eq!(p.derivative(2.0, 4), 0.0);
        let s = SmoothPart::Sine {
            amplitude: 2.0,
            frequency: 0.5,
        };
        // d/dx 2 sin(π x) = 2π cos(π x)
        assert_abs_diff_eq!(
            s.derivative(0.3, 1),
            2.0 * PI * (PI * 0.3).cos(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            s.derivative(0.3, 3),
            -2.0 * PI.powi(3) * (PI * 0.3).cos(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn cdf_quantile_examples() {
        let u = uniform_scenario(
            vec![Kink {
                theta: 0.5,
                jump: 1.0,
            }],
            ScaleSpec::Constant(1.0),
        );
        assert_eq!(u.true_cdf(0.3), 0.3);
        assert_eq!(u.kink_images().unwrap(), vec![0.5]);
        let g = gaussian_scenario(vec![
            Kink {
                theta: 0.0,
                jump: 1.0,
            },
            Kink {
                theta: 1.0,
                jump: 1.0,
            },
        ]);
        assert_eq!(g.true_cdf(0.0), 0.5);
        let l = g.kink_images().unwrap();
        assert_eq!(l[0], 0.5);
        assert_abs_diff_eq!(l[1], 0.841_344_746_068_542_9, epsilon = 1e-12);
        assert!(matches!(g.true_quantile(0.0), Err(Error::Domain(_))));
        assert!(matches!(g.true_quantile(1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn inverse_pairs() {
        let beta = Scenario::new(
            KinkFunction::smooth(SmoothPart::Zero),
            ScaleSpec::Constant(1.0),
            DesignSpec::A {
                law: DesignLaw::Beta { p: 2.0, q: 3.0 },
                errors: LinearProcessSpec::gaussian(0.6),
            },
        )
        .unwrap();
        let g = gaussian_scenario(vec![]);
        let mut rng = crate::seeds::rng_from(4);
        use rand::Rng;
        for _ in 0..100 {
            let xb: f64 = rng.random_range(0.02..0.98);
            let back = beta.true_quantile(beta.true_cdf(xb)).unwrap();
            assert!((back - xb).abs() < 1e-10, "{xb} {back}");
            let xg: f64 = rng.random_range(-4.0..4.0);
            let back = g.true_quantile(g.true_cdf(xg)).unwrap();
            assert!((back - xg).abs() < 1e-10, "{xg} {back}");
        }
    }

    #[test]
    fn kink_outside_support() {
        let s = Scenario::new(
            KinkFunction::new(
                vec![Kink {
                    theta: 1.2,
                    jump: 1.0,
                }],
                SmoothPart::Zero,
                3,
            )
            .unwrap(),
            ScaleSpec::Constant(1.0),
            DesignSpec::A {
                law: DesignLaw::Uniform01,
                errors: LinearProcessSpec::gaussian(0.6),
            },
        );
        assert_eq!(s.unwrap_err(), Error::DegenerateKink(1.2));
    }

    #[test]
    fn rank_scale_compositions() {
        let u = uniform_scenario(
            vec![Kink {
                theta: 0.4,
                jump: 1.0,
            }],
            ScaleSpec::SineBounded {
                base: 1.0,
                amplitude: 0.5,
                frequency: 1.0,
            },
        );
        for t in [0.1, 0.4, 0.77] {
            assert_eq!(u.mu_f(t).unwrap(), u.mu.eval(t));
        }
        assert!(matches!(u.mu_f(0.0), Err(Error::Domain(_))));
        assert!(matches!(
            u.sigma_f_derivative(1.0, 1),
            Err(Error::Domain(_))
        ));
        let c = uniform_scenario(vec![], ScaleSpec::Constant(2.0));
        assert_eq!(c.sigma_f_derivative(0.3, 3).unwrap(), 0.0);
        assert_eq!(c.sigma_f(0.3).unwrap(), 2.0);
        let g = gaussian_scenario(vec![Kink {
            theta: 0.0,
            jump: 2.0,
        }]);
        assert_eq!(g.mu_f(0.5).unwrap(), 0.0);
        let jumps = g.mu_f_kinks().unwrap();
        assert_abs_diff_eq!(jumps[0].jump, 2.0 / normal_pdf(0.0), epsilon = 1e-12);
    }

    #[test]
    fn finite_difference_derivative_of_composed_scale() {
        let g = Scenario::new(
            KinkFunction::smooth(SmoothPart::Zero),
            ScaleSpec::SineBounded {
                base: 1.0,
                amplitude: 0.3,
                frequency: 0.2,
            },
            DesignSpec::B {
                design: LinearProcessSpec::gaussian(0.6),
                errors: ErrorLaw::Gaussian { variance: 1.0 },
            },
        )
        .unwrap();
        // d/dt σ(Q(t)) = σ'(Q(t)) / φ(Q(t))
        let t = 0.4;
        let x = g.true_quantile(t).unwrap();
        let exact = g.sigma.derivative(x, 1) / normal_pdf(x);
        assert!((g.sigma_f_derivative(t, 1).unwrap() - exact).abs() < 1e-6);
    }

    #[test]
    fn lrd_design_needs_gaussian_innovations() {
        let s = Scenario::new(
            KinkFunction::smooth(SmoothPart::Zero),
            ScaleSpec::Constant(1.0),
            DesignSpec::B {
                design: LinearProcessSpec::gaussian(0.6).with_innovations(Innovations::Uniform),
                errors: ErrorLaw::Uniform,
            },
        );
        assert!(matches!(s, Err(Error::UnsupportedScenario(_))));
    }
}
