use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{kappa_oracle, shared_kernel};
use crate::quad::integrate_split;
use crate::scenario::{Dataset, Scenario};

use super::config::{BandwidthRole, EstimatorConfig, FMode};
use super::profile::PreparedData;

/// `κ̂_h(t) = κ_h(t) + b_h(t) + Z_h(t)` with oracle `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    pub kappa_hat: f64,
    /// `κ_h(t)` by quadrature on the rank scale.
    pub kappa_true: f64,
    /// `(n h^4)^{-1} Σ (γ_i - Eγ_1)` with `Eγ_1` integrated on the design scale.
    pub bias_term: f64,
    /// `κ̂ - κ_h - Z_h`.
    pub bias_residual: f64,
    /// `(n h^4)^{-1} Σ σ(X_i) K_3((F(X_i) - t)/h) ε_i`.
    pub noise_term: f64,
}

impl Decomposition {
    /// `κ̂ - (κ_h + b_h + Z_h)` using the design-scale bias.
    pub fn identity_gap(&self) -> f64 {
        self.kappa_hat - (self.kappa_true + self.bias_term + self.noise_term)
    }

    /// Difference between the two bias routes.
    pub fn route_gap(&self) -> f64 {
        self.bias_term - self.bias_residual
    }
}

/// Splits `κ̂` at `t` (detection bandwidth) into signal, bias and noise;
/// `quad_tol` is the absolute accuracy asked of each `κ`-scale integral.
pub fn decompose(
    data: &Dataset<f64>,
    scenario: &Scenario,
    config: &EstimatorConfig<f64>,
    t: f64,
    quad_tol: f64,
) -> Result<Decomposition> {
    config.validate()?;
    let h = config.bandwidth(BandwidthRole::Detect);
    let latents = data.latents()?;
    if !(t > h && t < 1.0 - h) {
        return Err(Error::Boundary {
            t,
            lo: h,
            hi: 1.0 - h,
        });
    }
    let kernel = shared_kernel(config.kernel_order)?;
    let k = kernel.evaluator::<f64>();
    let n = data.n() as f64;
    let norm = n * h.powi(4);

    let oracle_cfg = EstimatorConfig {
        f_mode: FMode::Oracle,
        ..*config
    };
    let prepared = PreparedData::new(data, oracle_cfg.f_mode)?;
    let kappa_hat = prepared.kappa(&k, t, h).unwrap_or(0.0);

    let mu_f_kinks = scenario.mu_f_kinks()?;
    let kappa_true = kappa_oracle(
        &kernel,
        |u: f64| scenario.mu_f(u).unwrap_or(f64::NAN),
        &mu_f_kinks,
        h,
        t,
        quad_tol,
    )?
    .kappa;

    let mut noise = 0.0;
    let mut gamma = 0.0;
    for i in 0..data.n() {
        let w = k.k3((latents.f_of_x[i] - t) / h);
        if w == 0.0 {
            continue;
        }
        noise += scenario.sigma.eval(data.x[i]) * w * latents.epsilon[i];
        gamma += scenario.mu.eval(data.x[i]) * w;
    }

    // Eγ_1 = ∫ μ(x) K_3((F(x) - t)/h) f(x) dx over x in [Q(t-h), Q(t+h)]
    let a = scenario.true_quantile(t - h)?;
    let b = scenario.true_quantile(t + h)?;
    let breaks: Vec<f64> = scenario
        .mu
        .kinks()
        .iter()
        .map(|kk| kk.theta)
        .filter(|&th| th > a && th < b)
        .collect();
    let e_gamma = integrate_split(
        |x: f64| scenario.mu.eval(x) * k.k3((scenario.true_cdf(x) - t) / h) * scenario.true_pdf(x),
        a,
        b,
        &breaks,
        quad_tol * h.powi(4),
    )?;

    let noise_term = noise / norm;
    Ok(Decomposition {
        kappa_hat,
        kappa_true,
        bias_term: (gamma - n * e_gamma) / norm,
        bias_residual: kappa_hat - kappa_true - noise_term,
        noise_term,
    })
}
