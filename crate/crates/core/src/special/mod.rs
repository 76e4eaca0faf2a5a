//! Special functions: log-gamma, Bessel J and I of real order, Laguerre
//! polynomials and the normalized Laguerre functions, together with the
//! series-truncation rule and adaptive quadrature the other modules share.
//!
//! Every routine is a pure function of its arguments.

mod bessel;
mod gamma;
mod laguerre;
pub mod quadrature;
mod series;

pub use bessel::{
    bessel_i, bessel_i_scaled, bessel_j, bessel_j_entire, bessel_j_entire_complex, ln_bessel_i,
};
pub use gamma::{gamma, ln_gamma};
pub use laguerre::{laguerre_fn, laguerre_fn_derivative, laguerre_poly, LaguerreFnIter};
pub use series::{ln_sum_series, sum_series, EvalResult, LogSum, SeriesSum, TailRule};

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

/// Field element accepted by the generic series and quadrature drivers.
pub trait Scalar:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn norm(self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
}
