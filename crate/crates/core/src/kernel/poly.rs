use std::ops::{Add, Mul};

use num_traits::{FromPrimitive, Num};

/// Dense univariate polynomial, `coeffs[i]` multiplying `x^i`.
///
/// Generic over the coefficient ring so the same code serves exact rational
/// arithmetic and floating point evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial<C> {
    coeffs: Vec<C>,
}

impl<C: Clone + Num> Polynomial<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, power: usize) -> C {
        self.coeffs.get(power).cloned().unwrap_or_else(C::zero)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &C) -> C {
        self.coeffs
            .iter()
            .rev()
            .fold(C::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn map<D: Clone + Num>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        Polynomial::new(self.coeffs.iter().map(f).collect())
    }

    /// Adds `delta` to the coefficient of `x^power`.
    pub fn add_to_coeff(&self, power: usize, delta: C) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() <= power {
            coeffs.resize(power + 1, C::zero());
        }
        coeffs[power] = coeffs[power].clone() + delta;
        Self::new(coeffs)
    }
}

impl<C: Clone + Num + FromPrimitive> Polynomial<C> {
    /// Formal derivative.
    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.clone() * C::from_usize(i).expect("index fits"))
                .collect(),
        )
    }

    /// `∫_{-1}^{1} x^j p(x) dx`, computed termwise.
    pub fn symmetric_moment(&self, j: usize) -> C {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| (i + j).is_multiple_of(2))
            .fold(C::zero(), |acc, (i, c)| {
                let two = C::from_u8(2).expect("2 fits");
                let denom = C::from_usize(i + j + 1).expect("index fits");
                acc + c.clone() * two / denom
            })
    }
}

impl<C: Clone + Num> Add for &Polynomial<C> {
    type Output = Polynomial<C>;

    fn add(self, rhs: Self) -> Polynomial<C> {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..len).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<C: Clone + Num> Mul for &Polynomial<C> {
    type Output = Polynomial<C>;

    fn mul(self, rhs: Self) -> Polynomial<C> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Polynomial::new(out)
    }
}
