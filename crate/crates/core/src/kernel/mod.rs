//! High-order polynomial kernels for kink detection.
//!
//! The kernel of order `k` (smoothness `s = 2k + 1`) is the even polynomial
//!
//! ```text
//! K(k, x) = a_k * Σ_{j=k-1}^{2k+2} b_{j,k} x^{2j-2k+2},   |x| <= 1
//! a_k     = (4k+5)! / (2^{4k+5} (2k)! (2k+2)!)
//! b_{j,k} = (-1)^{k+j+1} (2j)! / (j! (2k-j+2)! (2j-2k+2)!)
//! ```
//!
//! and zero outside `[-1, 1]`. Its derivatives `K_1, K_2, K_3` vanish at
//! `±1`, `K_1(0) = 0`, and `K_3` annihilates every monomial up to `x^{2k}`.
//! All coefficients are kept as exact rationals; floating point copies are
//! cached for evaluation.

mod oracle;
pub mod poly;
mod verify;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use poly::Polynomial;

pub use oracle::{kappa_oracle, KappaOracle, MuKink};
pub use verify::{verify_kernel, KernelCheck, VerificationReport};

/// Highest derivative of the kernel that is ever needed.
pub const MAX_DERIV: usize = 3;

/// Step of the dense scan defining [`KinkKernel::separation_constant`].
const CQ_SCAN_STEP: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct KinkKernel {
    order: u32,
    normalizer: BigRational,
    /// `(exponent, a_k * b_{j,k})` for `j = k-1 ..= 2k+2`.
    poly_coeffs: Vec<(u32, BigRational)>,
    /// `K, K_1, K_2, K_3` as exact polynomials on `[-1, 1]`.
    exact: [Polynomial<BigRational>; MAX_DERIV + 1],
    float: KernelEval<f64>,
    separation: f64,
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

/// `a_k` from its factorial formula.
pub fn normalizer(k: u32) -> BigRational {
    ratio(
        factorial(4 * k + 5),
        BigInt::from(2u32).pow(4 * k + 5) * factorial(2 * k) * factorial(2 * k + 2),
    )
}

/// `b_{j,k}` for `k-1 <= j <= 2k+2`.
pub fn legendre_coefficient(j: u32, k: u32) -> BigRational {
    let sign = if (k + j + 1).is_multiple_of(2) { 1 } else { -1 };
    ratio(
        BigInt::from(sign) * factorial(2 * j),
        factorial(j) * factorial(2 * k + 2 - j) * factorial(2 * j + 2 - 2 * k),
    )
}

/// Builds the order-`k` kernel. Fails for `k < 1`.
pub fn build_kernel(k: i64) -> Result<KinkKernel> {
    if !(1..=64).contains(&k) {
        return Err(Error::InvalidOrder(k));
    }
    let k = k as u32;
    let a = normalizer(k);
    let poly_coeffs: Vec<(u32, BigRational)> = (k - 1..=2 * k + 2)
        .map(|j| (2 * j + 2 - 2 * k, &a * legendre_coefficient(j, k)))
        .collect();
    let degree = poly_coeffs
        .iter()
        .map(|(e, _)| *e as usize)
        .max()
        .unwrap_or(0);
    let mut dense = vec![BigRational::zero(); degree + 1];
    for (e, c) in &poly_coeffs {
        dense[*e as usize] = c.clone();
    }
    Ok(KinkKernel::from_parts(
        k,
        a,
        poly_coeffs,
        Polynomial::new(dense),
    ))
}

/// Process-wide cache of built kernels; building involves exact rational
/// arithmetic and a dense separation scan.
pub fn shared_kernel(k: u32) -> Result<Arc<KinkKernel>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<KinkKernel>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(kernel) = cache.lock().expect("kernel cache poisoned").get(&k) {
        return Ok(Arc::clone(kernel));
    }
    let built = Arc::new(build_kernel(k as i64)?);
    let mut guard = cache.lock().expect("kernel cache poisoned");
    Ok(Arc::clone(guard.entry(k).or_insert(built)))
}

impl KinkKernel {
    fn from_parts(
        order: u32,
        normalizer: BigRational,
        poly_coeffs: Vec<(u32, BigRational)>,
        base: Polynomial<BigRational>,
    ) -> Self {
        let k1 = base.derivative();
        let k2 = k1.derivative();
        let k3 = k2.derivative();
        let exact = [base, k1, k2, k3];
        let float = KernelEval::from_exact(&exact);
        let separation = scan_separation(&float);
        Self {
            order,
            normalizer,
            poly_coeffs,
            exact,
            float,
            separation,
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Smoothness index `s = 2k + 1`.
    pub fn smoothness(&self) -> u32 {
        2 * self.order + 1
    }

    pub fn normalizer(&self) -> &BigRational {
        &self.normalizer
    }

    pub fn poly_coeffs(&self) -> &[(u32, BigRational)] {
        &self.poly_coeffs
    }

    /// Exact polynomial of `K_deriv` on `[-1, 1]`.
    pub fn polynomial(&self, deriv: usize) -> Result<&Polynomial<BigRational>> {
        self.exact
            .get(deriv)
            .ok_or(Error::UnsupportedDerivative(deriv))
    }

    /// Copy of this kernel with `a_k * delta` added to the `x^exponent`
    /// coefficient. Used to check that verification catches broken kernels.
    pub fn with_perturbed_term(&self, exponent: u32, delta: BigRational) -> Self {
        let shift = &self.normalizer * delta;
        let base = self.exact[0].add_to_coeff(exponent as usize, shift.clone());
        let mut coeffs = self.poly_coeffs.clone();
        match coeffs.iter_mut().find(|(e, _)| *e == exponent) {
            Some((_, c)) => *c = &*c + &shift,
            None => coeffs.push((exponent, shift)),
        }
        Self::from_parts(self.order, self.normalizer.clone(), coeffs, base)
    }

    /// `K_deriv(x)`; exactly zero outside `[-1, 1]`.
    pub fn eval<T: Scalar>(&self, deriv: usize, x: T) -> Result<T> {
        if deriv > MAX_DERIV {
            return Err(Error::UnsupportedDerivative(deriv));
        }
        if x.abs() > T::one() {
            return Ok(T::zero());
        }
        let c = &self.float.coeffs[deriv];
        Ok(c.iter().rev().fold(T::zero(), |acc, &v| acc * x + T::of(v)))
    }

    /// Exact `K_deriv(x)` at a rational point inside `[-1, 1]`.
    pub fn eval_exact(&self, deriv: usize, x: &BigRational) -> Result<BigRational> {
        let p = self.polynomial(deriv)?;
        if x.abs() > BigRational::one() {
            return Ok(BigRational::zero());
        }
        Ok(p.eval(x))
    }

    /// Exact `∫_{-1}^{1} x^j K_deriv(x) dx`.
    pub fn moment_exact(&self, deriv: usize, j: usize) -> Result<BigRational> {
        Ok(self.polynomial(deriv)?.symmetric_moment(j))
    }

    /// `∫_{-1}^{1} x^j K_deriv(x) dx` by termwise polynomial integration.
    pub fn moment(&self, deriv: usize, j: usize) -> Result<f64> {
        Ok(to_f64(&self.moment_exact(deriv, j)?))
    }

    /// Exact `∫ K_deriv(x)^2 dx`.
    pub fn l2_norm_sq_exact(&self, deriv: usize) -> Result<BigRational> {
        let p = self.polynomial(deriv)?;
        Ok((p * p).symmetric_moment(0))
    }

    pub fn l2_norm_sq(&self, deriv: usize) -> Result<f64> {
        Ok(to_f64(&self.l2_norm_sq_exact(deriv)?))
    }

    /// Largest `c` in `(0, 1)` with `|K_1(τ)| >= |K_1'(0)| |τ| / 2` for all
    /// `|τ| <= c`, from a scan at step `1e-4`.
    pub fn separation_constant(&self) -> f64 {
        self.separation
    }

    /// Floating point evaluator with coefficients converted to `T` once.
    pub fn evaluator<T: Scalar>(&self) -> KernelEval<T> {
        KernelEval {
            coeffs: std::array::from_fn(|d| {
                self.float.coeffs[d].iter().map(|&v| T::of(v)).collect()
            }),
        }
    }
}

pub(crate) fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn scan_separation(eval: &KernelEval<f64>) -> f64 {
    let slope = eval.value(2, 0.0).abs();
    let steps = (1.0 / CQ_SCAN_STEP).round() as usize;
    let mut last_ok = 0.0;
    for i in 1..steps {
        let tau = i as f64 * CQ_SCAN_STEP;
        let ok = [tau, -tau]
            .iter()
            .all(|&t| eval.value(1, t).abs() >= slope * tau / 2.0);
        if !ok {
            break;
        }
        last_ok = tau;
    }
    last_ok
}

/// Coefficients of `K, K_1, K_2, K_3` in a fixed float type, for hot loops.
#[derive(Debug, Clone)]
pub struct KernelEval<T> {
    coeffs: [Vec<T>; MAX_DERIV + 1],
}

impl KernelEval<f64> {
    fn from_exact(exact: &[Polynomial<BigRational>; MAX_DERIV + 1]) -> Self {
        Self {
            coeffs: std::array::from_fn(|d| exact[d].coeffs().iter().map(to_f64).collect()),
        }
    }
}

impl<T: Scalar> KernelEval<T> {
    /// `K_deriv(x)`, zero outside `[-1, 1]`. `deriv` must be at most 3.
    #[inline]
    pub fn value(&self, deriv: usize, x: T) -> T {
        if x.abs() > T::one() {
            return T::zero();
        }
        self.coeffs[deriv]
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * x + c)
    }

    #[inline]
    pub fn k3(&self, x: T) -> T {
        self.value(3, x)
    }
}
