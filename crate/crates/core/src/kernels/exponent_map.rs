use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::scalar::Real;

/// Default width of the band `(1, 1+δ)` that is snapped to exactly 1.
pub const DEFAULT_DELTA_SNAP: f64 = 0.05;

/// Per-cell exponent `p(x) ∈ {1} ∪ [1+δ, 2]`.
///
/// Values inside `(1, 1+δ)` are snapped to 1 on construction so the
/// kernels can dispatch `p = 1` and `p = 2` by exact comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentMap<T> {
    field: ScalarField<T>,
    delta_snap: f64,
}

impl<T: Real> ExponentMap<T> {
    pub fn new(spec: GridSpec, values: Vec<T>, delta_snap: f64) -> Result<Self> {
        Self::from_field(ScalarField::new(spec, values)?, delta_snap)
    }

    pub fn from_field(field: ScalarField<T>, delta_snap: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta_snap) {
            return Err(Error::InvalidArgument(format!("snap band {delta_snap} must lie in [0, 1)")));
        }
        let (one, two) = (T::one(), T::lit(2.0));
        if let Some(bad) = field.values().iter().find(|&&p| !(p >= one && p <= two)) {
            return Err(Error::InvalidArgument(format!("exponent {bad} outside [1, 2]")));
        }
        let upper = T::lit(1.0 + delta_snap);
        let snapped = field.map(|p| if p > one && p < upper { one } else { p });
        Ok(ExponentMap {
            field: snapped,
            delta_snap,
        })
    }

    pub fn constant(spec: GridSpec, p: T) -> Result<Self> {
        Self::from_field(ScalarField::constant(spec, p), DEFAULT_DELTA_SNAP)
    }

    pub fn spec(&self) -> &GridSpec {
        self.field.spec()
    }

    pub fn values(&self) -> &[T] {
        self.field.values()
    }

    pub fn as_field(&self) -> &ScalarField<T> {
        &self.field
    }

    pub fn delta_snap(&self) -> f64 {
        self.delta_snap
    }

    /// Number of cells with `p = 1` exactly.
    pub fn count_ones(&self) -> usize {
        self.values().iter().filter(|&&p| p == T::one()).count()
    }
}
