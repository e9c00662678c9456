use statrs::function::beta::{beta_reg, ln_beta};
use statrs::function::erf::erfc_inv;

use super::DesignLaw;

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `Φ^{-1}(p)` with one Newton polish step; `p` must lie in `(0, 1)`.
pub fn normal_quantile(p: f64) -> f64 {
    let x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    let step = (normal_cdf(x) - p) / normal_pdf(x);
    if step.is_finite() {
        x - step
    } else {
        x
    }
}

pub(crate) fn law_cdf(law: &DesignLaw, x: f64) -> f64 {
    match *law {
        DesignLaw::Uniform01 => x.clamp(0.0, 1.0),
        DesignLaw::Beta { p, q } => {
            if x <= 0.0 {
                0.0
            } else if x >= 1.0 {
                1.0
            } else {
                beta_reg(p, q, x)
            }
        }
    }
}

pub(crate) fn law_pdf(law: &DesignLaw, x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    match *law {
        DesignLaw::Uniform01 => 1.0,
        DesignLaw::Beta { p, q } => {
            if (x == 0.0 && p > 1.0) || (x == 1.0 && q > 1.0) {
                return 0.0;
            }
            ((p - 1.0) * x.ln() + (q - 1.0) * (1.0 - x).ln() - ln_beta(p, q)).exp()
        }
    }
}

pub(crate) fn law_quantile(law: &DesignLaw, prob: f64) -> f64 {
    match *law {
        DesignLaw::Uniform01 => prob,
        DesignLaw::Beta { .. } => {
            // safeguarded Newton on a shrinking bracket
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            let mut x = prob;
            for _ in 0..200 {
                let f = law_cdf(law, x) - prob;
                if f.abs() < 1e-15 {
                    break;
                }
                if f > 0.0 {
                    hi = x;
                } else {
                    lo = x;
                }
                let d = law_pdf(law, x);
                let newton = x - f / d;
                x = if d > 0.0 && newton > lo && newton < hi {
                    newton
                } else {
                    0.5 * (lo + hi)
                };
                if hi - lo < 1e-16 {
                    break;
                }
            }
            x
        }
    }
}
