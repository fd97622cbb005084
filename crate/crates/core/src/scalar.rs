//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, NumAssign};
use serde::Serialize;

/// Real field the simulator runs over.
///
/// The tolerances are part of the type because the same algorithm needs
/// different guards in single and double precision.
pub trait Real:
    Float + FloatConst + NumAssign + Sum + Debug + Display + Default + Serialize + Send + Sync + 'static
{
    /// Allowed deviation from Hermiticity, unit trace and positivity.
    const VALIDATION_TOL: Self;
    /// Off-diagonal Frobenius norm at which Jacobi sweeps stop.
    const JACOBI_TOL: Self;

    fn of(x: f64) -> Self;

    fn as_f64(self) -> f64;

    /// Magnitudes below this are indistinguishable from rounding noise in
    /// a product of a few unit-scale 4x4 matrices.
    fn noise_floor() -> Self {
        Self::epsilon() * Self::of(64.0)
    }
}

impl Real for f64 {
    const VALIDATION_TOL: f64 = 1e-10;
    const JACOBI_TOL: f64 = 1e-12;

    #[inline]
    fn of(x: f64) -> Self {
        x
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    const VALIDATION_TOL: f32 = 1e-5;
    const JACOBI_TOL: f32 = 1e-6;

    #[inline]
    fn of(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}
