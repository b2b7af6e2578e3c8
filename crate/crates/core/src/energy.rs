//! The energy-model contract consumed by the geometry layer.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::tensor::Rank3;

/// Largest admissible argument of `exp` in energy evaluations; double
/// precision overflows near 709.
pub const EXP_OVERFLOW_BOUND: f64 = 700.0;

/// An energy-like function together with its derivatives up to third order.
///
/// Implementations must return a Hessian symmetric in `(i, j)` and, when
/// `has_analytic_thirds` is true, third derivatives fully symmetric in
/// `(i, j, k)`. Time-independent models ignore `t`.
pub trait EnergyModel: Sync + Send {
    fn dim(&self) -> usize;

    fn value(&self, x: &DVector<f64>, t: f64) -> Result<f64>;

    fn gradient(&self, x: &DVector<f64>, t: f64) -> Result<DVector<f64>>;

    fn hessian(&self, x: &DVector<f64>, t: f64) -> Result<DMatrix<f64>>;

    /// `thirds[(i, j, k)] = d^3 E / d x_k d x_i d x_j`.
    fn third_derivatives(&self, x: &DVector<f64>, t: f64) -> Result<Rank3>;

    /// True when `third_derivatives` is closed-form rather than numerical.
    fn has_analytic_thirds(&self) -> bool {
        true
    }
}

/// Guard an exponent before calling `exp` on it.
pub(crate) fn checked_exp(exponent: f64) -> Result<f64> {
    if exponent > EXP_OVERFLOW_BOUND {
        Err(crate::error::GeodevError::EnergyOverflow {
            exponent,
            bound: EXP_OVERFLOW_BOUND,
        })
    } else {
        Ok(exponent.exp())
    }
}
