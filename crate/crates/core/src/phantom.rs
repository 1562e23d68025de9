//! Synthetic test images.

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::scalar::Real;

const SQUARE_DOMAIN: [[f64; 2]; 2] = [[-10.0, 10.0], [-10.0, 10.0]];

/// `f(x) = χ_{[-5,5]²}(x) · x₀` on `[-10, 10]²`.
pub fn square_phantom<T: Real>(spec: &GridSpec) -> Result<ScalarField<T>> {
    if spec.extent() != SQUARE_DOMAIN {
        return Err(Error::InvalidGrid(format!(
            "square phantom needs extent [-10,10]^2, got {:?}",
            spec.extent()
        )));
    }
    ScalarField::from_fn(*spec, square_value)
}

pub(crate) fn square_value(x0: f64, x1: f64) -> f64 {
    if x0.abs() <= 5.0 && x1.abs() <= 5.0 {
        x0
    } else {
        0.0
    }
}

/// Grid used by [`square_phantom`] at `n × n` resolution.
pub fn square_grid(n: usize) -> Result<GridSpec> {
    GridSpec::new(n, n, SQUARE_DOMAIN)
}

/// Piecewise-affine tomography phantom on `[-1, 1]²`: edges together with
/// gradual intensity changes.
///
/// * an ellipse carrying a horizontal ramp,
/// * an inner ellipse with a vertical ramp,
/// * a constant disc and a small bright constant square.
pub fn tomo_phantom<T: Real>(spec: &GridSpec) -> Result<ScalarField<T>> {
    ScalarField::from_fn(*spec, tomo_value)
}

pub(crate) fn tomo_value(x: f64, y: f64) -> f64 {
    let ellipse = |cx: f64, cy: f64, a: f64, b: f64| ((x - cx) / a).powi(2) + ((y - cy) / b).powi(2) <= 1.0;
    let mut v = 0.0;
    if ellipse(0.0, 0.0, 0.85, 0.7) {
        v = 0.4 + 0.3 * x;
    }
    if ellipse(-0.1, 0.25, 0.35, 0.25) {
        v = 0.6 - 0.5 * (y - 0.25);
    }
    if ellipse(0.4, -0.3, 0.2, 0.2) {
        v = 1.0;
    }
    if (x + 0.45).abs() <= 0.12 && (y + 0.3).abs() <= 0.12 {
        v = 0.05;
    }
    v
}

pub fn tomo_grid(n: usize) -> Result<GridSpec> {
    GridSpec::centered_square(n, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_phantom_values() {
        assert_eq!(square_value(0.0, 0.0), 0.0);
        assert_eq!(square_value(3.0, 1.0), 3.0);
        assert_eq!(square_value(7.0, 0.0), 0.0);
        // a 20x20 grid has a cell centred at (3.5, 0.5)
        let f: ScalarField<f64> = square_phantom(&square_grid(20).unwrap()).unwrap();
        let [x0, x1] = f.spec().cell_center(10, 13);
        assert_eq!((x0, x1), (3.5, 0.5));
        assert_eq!(f.get(10, 13), 3.5);
    }

    #[test]
    fn square_phantom_rejects_other_extents() {
        let spec = GridSpec::centered_square(8, 1.0).unwrap();
        assert!(square_phantom::<f64>(&spec).is_err());
    }

    #[test]
    fn tomo_phantom_is_bounded() {
        let f: ScalarField<f64> = tomo_phantom(&tomo_grid(64).unwrap()).unwrap();
        assert!(f.min() >= 0.0 && f.max() <= 1.0);
        assert!(f.range() > 0.5);
    }
}
