//! Kink detection and localisation for random-design nonparametric
//! regression with long-range dependent errors or design.
//!
//! A kink is a jump in the first derivative of the regression function.
//! The pipeline smooths the data with the third derivative of a high-order
//! polynomial kernel after mapping the design to the rank scale, flags
//! kinks with a standardized scan, locates the zero crossing of the
//! smoothed third derivative between its extrema, and maps the crossing
//! back through the empirical quantile function.
//!
//! The numerical core is generic over [`Scalar`] (`f32` / `f64`); the
//! aliases below fix the common double precision instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod experiments;
pub mod kernel;
pub mod lrd;
pub mod quad;
pub mod scalar;
pub mod scenario;
pub mod seeds;

pub use error::{Error, Result};
pub use kernel::{build_kernel, KernelEval, KinkKernel};
pub use scalar::Scalar;

pub type KernelEval64 = KernelEval<f64>;
pub type KernelEval32 = KernelEval<f32>;
