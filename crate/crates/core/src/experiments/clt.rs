use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{upsilon_oracle, BandwidthRole, EstimatorConfig, FMode, PreparedData};
use crate::kernel::{kappa_oracle, shared_kernel};
use crate::lrd::lrd_constants;
use crate::quad::integrate_split;
use crate::scenario::{generate_dataset, normal_pdf, normal_quantile, DesignSpec, Scenario};
use crate::seeds::replication_seed;

use super::stats::ks_distance_normal;

/// Accuracy asked of the `κ_h` and Hermite-coefficient integrals.
pub const CLT_QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CltRegime {
    /// (A), short-range norming `sqrt(n h^7)`.
    A1,
    /// (A), long-range norming `n^{α_ε/2} h^{3-q} / L(n)`.
    A2,
    /// (B), short-range norming.
    B1,
    /// (B), long-range norming `n^{α_x/2} / L(n)` with Hermite rank one.
    B2,
}

impl CltRegime {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A1" => Ok(Self::A1),
            "A2" => Ok(Self::A2),
            "B1" => Ok(Self::B1),
            "B2" => Ok(Self::B2),
            other => Err(Error::InvalidParameter(format!("unknown regime {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltResult {
    pub regime: CltRegime,
    pub n: usize,
    pub t: f64,
    pub bandwidth: f64,
    pub reps: usize,
    pub master_seed: u64,
    /// `norming · (κ̂_h(t) - κ_h(t))` per replication.
    pub values: Vec<f64>,
    pub kappa_true: f64,
    pub norming: f64,
    pub target_variance: f64,
    /// Which quantity the target variance was built from.
    pub target_source: String,
    pub ks_distance: f64,
    pub sample_variance: f64,
}

/// `υ_*(t) = σ_F^{(q)}(t) / q! ∫ x^q K_3(x) dx` with `q = s ∧ r`.
pub fn upsilon_star(scenario: &Scenario, kernel_order: u32, t: f64) -> Result<f64> {
    let q = scenario.mu.smoothness.min(scenario.sigma_smoothness);
    let kernel = shared_kernel(kernel_order)?;
    let moment = kernel.moment(3, q as usize)?;
    let fact: f64 = (1..=q).map(f64::from).product();
    Ok(scenario.sigma_f_derivative(t, q)? / fact * moment)
}

/// `ℋ_1(t)` by quadrature of its defining integral over `u ∈ Φ^{-1}(t) ± 10`,
/// scaled by `κ_h(t) / (s_X^3 σ_η φ(Φ^{-1}(t)))`; `κ_h` uses the detection
/// bandwidth of `config`.
pub fn hermite_h1(
    scenario: &Scenario,
    config: &EstimatorConfig<f64>,
    t: f64,
    quad_tol: f64,
) -> Result<f64> {
    let DesignSpec::B { design, .. } = &scenario.design else {
        return Err(Error::UnsupportedScenario(
            "Hermite coefficient needs an LRD Gaussian design".into(),
        ));
    };
    let h = config.bandwidth_detect;
    let kernel = shared_kernel(config.kernel_order)?;
    let kappa = kappa_oracle(
        &kernel,
        |u: f64| scenario.mu_f(u).unwrap_or(f64::NAN),
        &scenario.mu_f_kinks()?,
        h,
        t,
        quad_tol,
    )?
    .kappa;
    let consts = lrd_constants(design, 1e-12)?;
    let (s_x, sigma_eta) = (consts.s_x, consts.sigma_eta_sq.sqrt());
    let z = normal_quantile(t);
    // panels narrower than the Gaussian factors keep the adaptive rule
    // from sampling only the negligible tails
    let breaks: Vec<f64> = (1..80).map(|i| z - 10.0 + 0.25 * i as f64).collect();
    let integral = integrate_split(
        |u: f64| normal_pdf((z - u) / s_x) * (z - u) * normal_pdf(u / sigma_eta),
        z - 10.0,
        z + 10.0,
        &breaks,
        quad_tol,
    )?;
    Ok(kappa * integral / (s_x.powi(3) * sigma_eta * normal_pdf(z)))
}

/// Replicates `κ̂_h(t) - κ_h(t)` (oracle `F`, detection bandwidth) under the
/// regime's norming and measures the KS distance to the limiting normal law.
pub fn run_clt_study(
    scenario: &Scenario,
    t: f64,
    n: usize,
    reps: usize,
    regime: CltRegime,
    config: &EstimatorConfig<f64>,
    master_seed: u64,
) -> Result<CltResult> {
    config.validate()?;
    super::rate::check_reps(reps, 2)?;
    let h = config.bandwidth(BandwidthRole::Detect);
    if !(t > h && t < 1.0 - h) {
        return Err(Error::Boundary {
            t,
            lo: h,
            hi: 1.0 - h,
        });
    }
    let kernel = shared_kernel(config.kernel_order)?;
    let kappa_true = kappa_oracle(
        &kernel,
        |u: f64| scenario.mu_f(u).unwrap_or(f64::NAN),
        &scenario.mu_f_kinks()?,
        h,
        t,
        CLT_QUAD_TOL,
    )?
    .kappa;
    let nf = n as f64;
    let (norming, target_variance, source) = match (regime, &scenario.design) {
        (CltRegime::A1, DesignSpec::A { .. }) | (CltRegime::B1, DesignSpec::B { .. }) => {
            let u = upsilon_oracle(scenario, config.kernel_order, t)?;
            ((nf * h.powi(7)).sqrt(), u * u, "upsilon^2(t)")
        }
        (CltRegime::A2, DesignSpec::A { errors, .. }) => {
            let star = upsilon_star(scenario, config.kernel_order, t)?;
            if scenario.sigma.is_constant() || star.abs() < 1e-12 {
                return Err(Error::Regime(
                    "regime A2 degenerates: upsilon_*(t) = 0 (constant scale or vanishing kernel moment)".into(),
                ));
            }
            let consts = lrd_constants(&errors.resolved(n), 1e-12)?;
            let q = scenario.mu.smoothness.min(scenario.sigma_smoothness) as i32;
            let l = errors.slowly_varying.value(nf);
            (
                nf.powf(errors.alpha / 2.0) * h.powi(3 - q) / l,
                consts.c1sq * star * star,
                "C1^2 upsilon_*^2(t)",
            )
        }
        (CltRegime::B2, DesignSpec::B { design, .. }) => {
            let resolved = design.resolved(n);
            let consts = lrd_constants(&resolved, 1e-12)?;
            let h1 = hermite_h1(scenario, config, t, CLT_QUAD_TOL)?;
            if h1.abs() < 1e-12 {
                return Err(Error::Regime("regime B2 degenerates: H_1(t) = 0".into()));
            }
            let l = design.slowly_varying.value(nf);
            (
                nf.powf(design.alpha / 2.0) / l,
                consts.c1sq * h1 * h1,
                "C1^2 H_1^2(t)",
            )
        }
        (regime, _) => {
            return Err(Error::Regime(format!(
                "regime {regime:?} does not match the scenario's dependence assumption"
            )))
        }
    };
    let k3 = kernel.evaluator::<f64>();
    let values: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let data = generate_dataset::<f64>(
                scenario,
                n,
                replication_seed(master_seed, 0, rep as u64),
                false,
            )?;
            let prepared = PreparedData::new(&data, FMode::Oracle)?;
            let kappa = prepared.kappa(&k3, t, h).unwrap_or(0.0);
            Ok(norming * (kappa - kappa_true))
        })
        .collect::<Result<_>>()?;
    let mean = values.iter().sum::<f64>() / reps as f64;
    let sample_variance =
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (reps - 1) as f64;
    Ok(CltResult {
        regime,
        n,
        t,
        bandwidth: h,
        reps,
        master_seed,
        ks_distance: ks_distance_normal(&values, target_variance)?,
        values,
        kappa_true,
        norming,
        target_variance,
        target_source: source.into(),
        sample_variance,
    })
}
