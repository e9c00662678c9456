use crate::error::{Error, Result};

/// `B_m(x) = sqrt(2 log m) + (x - (log log m)/2 - log(2 sqrt(π))) / sqrt(2 log m)`.
pub fn gumbel_norming(m: usize, x: f64) -> Result<f64> {
    if m < 3 {
        return Err(Error::Domain(format!(
            "Gumbel norming needs m >= 3, got {m}"
        )));
    }
    let lm = (m as f64).ln();
    let r = (2.0 * lm).sqrt();
    Ok(r + (x - 0.5 * lm.ln() - (2.0 * std::f64::consts::PI.sqrt()).ln()) / r)
}

/// Limit law of the two-sided scan maximum, `exp(-2 e^{-x})`.
pub fn gumbel_cdf(x: f64) -> f64 {
    (-2.0 * (-x).exp()).exp()
}

/// Level `x_q` with `gumbel_cdf(x_q) = q`.
pub fn gumbel_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("level {q} not in (0, 1)")));
    }
    Ok(-(-q.ln() / 2.0).ln())
}

/// Threshold inflation making the detection rule `|𝒯| >= inflation ·
/// sqrt(2|log 2h|)` match the Gumbel `q`-quantile of the scan maximum over
/// `m = ⌈1/(2h)⌉` cells.
pub fn gumbel_inflation(h: f64, q: f64) -> Result<f64> {
    let m = (1.0 / (2.0 * h)).ceil() as usize;
    Ok(gumbel_norming(m, gumbel_quantile(q)?)? / (2.0 * (2.0 * h).ln().abs()).sqrt())
}
