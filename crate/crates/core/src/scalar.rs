//! Floating-point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Real scalar used for densities, stiffness entries and displacements.
///
/// Implemented for `f32` and `f64`. The solver tolerances scale with the
/// precision of the type, so `f32` runs satisfy looser residual contracts.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Relative residual accepted from the linear solver.
    fn solve_tolerance() -> Self;

    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for the finite literals used in this crate.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn solve_tolerance() -> Self {
        1e-8
    }
}

impl Scalar for f32 {
    fn solve_tolerance() -> Self {
        1e-4
    }
}
