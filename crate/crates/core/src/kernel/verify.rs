use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{to_f64, KinkKernel};

/// One boundary or moment condition of the kernel class.
#[derive(Debug, Clone, Serialize)]
pub struct KernelCheck {
    pub name: String,
    pub value: f64,
    /// The exact rational value is zero.
    pub exact_zero: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub order: u32,
    pub tolerance: f64,
    pub checks: Vec<KernelCheck>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &KernelCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Checks `K_i(±1) = 0` for `i = 1, 2, 3`, `K_1(0) = 0` and the vanishing
/// moments `∫ u^j K_3(u) du = 0` for `j = 0..=2k`.
pub fn verify_kernel(kernel: &KinkKernel, tol: f64) -> VerificationReport {
    let mut checks = Vec::new();
    let mut push = |name: String, exact: BigRational| {
        let value = to_f64(&exact);
        checks.push(KernelCheck {
            name,
            value,
            exact_zero: exact.is_zero(),
            pass: value.abs() < tol,
        });
    };
    let one = BigRational::one();
    for deriv in 1..=3 {
        for (label, x) in [("-1", -one.clone()), ("1", one.clone())] {
            let v = kernel.eval_exact(deriv, &x).expect("deriv <= 3");
            push(format!("K{deriv}({label})"), v);
        }
    }
    push(
        "K1(0)".to_string(),
        kernel
            .eval_exact(1, &BigRational::zero())
            .expect("deriv <= 3"),
    );
    for j in 0..=2 * kernel.order() as usize {
        push(
            format!("moment K3 x^{j}"),
            kernel.moment_exact(3, j).expect("deriv <= 3"),
        );
    }
    let pass = checks.iter().all(|c| c.pass);
    VerificationReport {
        order: kernel.order(),
        tolerance: tol,
        checks,
        pass,
    }
}
