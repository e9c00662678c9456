use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::lrd::simulate_lrd;
use crate::scalar::Scalar;
use crate::seeds::{derive_seed, rng_from};

use super::{DesignLaw, DesignSpec, EmpiricalDistribution, ErrorLaw, Scenario};

const DESIGN_STREAM: u64 = 0;
const ERROR_STREAM: u64 = 1;

/// Unobserved truth kept alongside a simulated sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Latents<T> {
    pub epsilon: Vec<T>,
    /// `F(X_i)` under the true design law.
    pub f_of_x: Vec<T>,
    pub theta: Vec<f64>,
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Dataset<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub latents: Option<Latents<T>>,
    pub scenario: Option<Scenario>,
    pub seed: Option<u64>,
}

impl<T: Scalar> Dataset<T> {
    /// Observed pairs without any generating model attached.
    pub fn from_xy(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidParameter(format!(
                "x has {} values, y has {}",
                x.len(),
                y.len()
            )));
        }
        if x.is_empty() {
            return Err(Error::InsufficientData("empty dataset".into()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite observation".into()));
        }
        Ok(Self {
            x,
            y,
            latents: None,
            scenario: None,
            seed: None,
        })
    }

    pub fn with_scenario(mut self, scenario: Scenario) -> Self {
        self.scenario = Some(scenario);
        self
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn empirical(&self) -> Result<EmpiricalDistribution<T>> {
        EmpiricalDistribution::new(&self.x)
    }

    pub fn scenario(&self) -> Result<&Scenario> {
        self.scenario
            .as_ref()
            .ok_or(Error::MissingLatent("scenario"))
    }

    pub fn latents(&self) -> Result<&Latents<T>> {
        self.latents.as_ref().ok_or(Error::MissingLatent("latents"))
    }
}

/// Draws design and errors from independent streams derived from `seed`
/// and composes `Y_i = μ(X_i) + σ(X_i) ε_i`.
pub fn generate_dataset<T: Scalar>(
    scenario: &Scenario,
    n: usize,
    seed: u64,
    keep_latents: bool,
) -> Result<Dataset<T>> {
    if n < 8 {
        return Err(Error::InsufficientData(format!("n = {n} < 8")));
    }
    scenario.validate()?;
    let mut design_rng = rng_from(derive_seed(seed, DESIGN_STREAM));
    let mut error_rng = rng_from(derive_seed(seed, ERROR_STREAM));
    let (x, eps): (Vec<f64>, Vec<f64>) = match &scenario.design {
        DesignSpec::A { law, errors } => {
            let x = match *law {
                DesignLaw::Uniform01 => (0..n).map(|_| design_rng.random::<f64>()).collect(),
                DesignLaw::Beta { p, q } => {
                    let d = Beta::new(p, q).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                    (0..n).map(|_| d.sample(&mut design_rng)).collect()
                }
            };
            let eps = simulate_lrd(errors, n, &mut error_rng, false)?.values;
            (x, eps)
        }
        DesignSpec::B { design, errors } => {
            let x = simulate_lrd(design, n, &mut design_rng, false)?.values;
            let eps = match *errors {
                ErrorLaw::Gaussian { variance } => {
                    let sd = variance.sqrt();
                    (0..n)
                        .map(|_| {
                            let z: f64 = StandardNormal.sample(&mut error_rng);
                            sd * z
                        })
                        .collect::<Vec<f64>>()
                }
                ErrorLaw::Uniform => {
                    let half = 3f64.sqrt();
                    (0..n)
                        .map(|_| error_rng.random_range(-half..half))
                        .collect()
                }
            };
            (x, eps)
        }
    };
    let y = x
        .iter()
        .zip(&eps)
        .map(|(&xi, &e)| T::of(scenario.mu.eval(xi) + scenario.sigma.eval(xi) * e))
        .collect();
    let latents = if keep_latents {
        Some(Latents {
            epsilon: eps.iter().map(|&e| T::of(e)).collect(),
            f_of_x: x.iter().map(|&xi| T::of(scenario.true_cdf(xi))).collect(),
            theta: scenario.mu.kinks().iter().map(|k| k.theta).collect(),
            lambda: scenario.kink_images()?,
        })
    } else {
        None
    };
    Ok(Dataset {
        x: x.into_iter().map(T::of).collect(),
        y,
        latents,
        scenario: Some(scenario.clone()),
        seed: Some(seed),
    })
}
