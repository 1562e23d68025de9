//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the grid, kernels and solvers are generic over.
///
/// Implemented for `f32` and `f64`. Tolerances that only make sense in
/// double precision (Newton residuals, adjointness checks) are exposed as
/// associated defaults so single precision picks looser values.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Default absolute residual tolerance for the implicit-equation solver.
    const NEWTON_TOL: f64;

    /// Converts an `f64` literal, panicking only for values the type cannot represent at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    const NEWTON_TOL: f64 = 1e-5;
}

impl Real for f64 {
    const NEWTON_TOL: f64 = 1e-10;
}

/// Extended real value: either finite or `+∞`.
///
/// Used where a functional can take the value `+∞` (indicator functions);
/// never produced by floating-point overflow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extended<T> {
    Finite(T),
    PosInfinity,
}

impl<T: Real> Extended<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<T> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::PosInfinity => None,
        }
    }

    /// Lossy conversion for reporting; `+∞` maps to the float infinity.
    pub fn to_float(self) -> T {
        match self {
            Extended::Finite(v) => v,
            Extended::PosInfinity => T::infinity(),
        }
    }
}

impl<T: Real> std::ops::Add for Extended<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a + b),
            _ => Extended::PosInfinity,
        }
    }
}

impl<T: Real> std::ops::Mul<T> for Extended<T> {
    type Output = Self;
    /// Scaling by a nonnegative weight; `0 · ∞` stays `∞`, matching the indicator convention.
    fn mul(self, w: T) -> Self {
        match self {
            Extended::Finite(a) => Extended::Finite(a * w),
            Extended::PosInfinity => Extended::PosInfinity,
        }
    }
}

impl<T: Real> Display for Extended<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::PosInfinity => write!(f, "+inf"),
        }
    }
}
