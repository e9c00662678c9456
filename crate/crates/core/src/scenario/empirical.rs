use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::Dataset;

/// Sorted design sample with `F_n(x) = n^{-1} #{X_i <= x}` and the
/// left-continuous inverse `Q_n(p) = X_(⌈np⌉)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution<T> {
    sorted: Vec<T>,
}

impl<T: Scalar> EmpiricalDistribution<T> {
    pub fn new(sample: &[T]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::InsufficientData("empty sample".into()));
        }
        if sample.iter().any(|v| v.is_nan()) {
            return Err(Error::Numeric("NaN in sample".into()));
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[T] {
        &self.sorted
    }

    pub fn cdf(&self, x: T) -> T {
        let count = self.sorted.partition_point(|v| *v <= x);
        T::of(count as f64 / self.sorted.len() as f64)
    }

    pub fn quantile(&self, p: T) -> Result<T> {
        if !(p > T::zero() && p <= T::one()) {
            return Err(Error::Domain(format!("quantile level {p} not in (0, 1]")));
        }
        let n = self.sorted.len();
        // guard against np landing a hair above an integer through rounding
        let np = p.f64() * n as f64;
        let mut idx = np.ceil() as usize;
        if idx > 1 && (np - (idx - 1) as f64).abs() <= 8.0 * f64::EPSILON * np {
            idx -= 1;
        }
        Ok(self.sorted[idx.clamp(1, n) - 1])
    }
}

pub fn empirical_cdf<T: Scalar>(data: &Dataset<T>, x: T) -> Result<T> {
    Ok(EmpiricalDistribution::new(&data.x)?.cdf(x))
}

pub fn empirical_quantile<T: Scalar>(data: &Dataset<T>, p: T) -> Result<T> {
    EmpiricalDistribution::new(&data.x)?.quantile(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_statistic_convention() {
        let e = EmpiricalDistribution::new(&[0.2, 0.9, 0.5]).unwrap();
        assert_eq!(e.quantile(0.5).unwrap(), 0.5);
        assert_eq!(e.quantile(1.0).unwrap(), 0.9);
        assert_eq!(e.quantile(1.0 / 3.0).unwrap(), 0.2);
        assert_eq!(e.quantile(0.34).unwrap(), 0.5);
        assert!(matches!(e.quantile(0.0), Err(Error::Domain(_))));
        assert_eq!(e.cdf(0.5), 2.0 / 3.0);
        assert_eq!(e.cdf(0.1), 0.0);
        assert_eq!(e.cdf(0.9), 1.0);
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(EmpiricalDistribution::<f64>::new(&[]).is_err());
    }
}
