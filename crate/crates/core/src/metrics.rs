//! Image-quality metrics used by the experiments.

use crate::diffops::gradient;
use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::scalar::Real;

/// Peak signal-to-noise ratio in dB, `10·log₁₀(range(ref)² / MSE)`.
///
/// Returns `f64::INFINITY` when the two fields are identical.
pub fn psnr<T: Real>(f: &ScalarField<T>, reference: &ScalarField<T>) -> Result<f64> {
    f.spec().ensure_same(reference.spec(), "psnr")?;
    let range = reference.range().as_f64();
    if !(range > 0.0) {
        return Err(Error::InvalidArgument("psnr reference is constant".into()));
    }
    let mse = mse(f, reference)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (range * range / mse).log10())
}

/// Mean squared error over cells.
pub fn mse<T: Real>(f: &ScalarField<T>, reference: &ScalarField<T>) -> Result<f64> {
    f.spec().ensure_same(reference.spec(), "mse")?;
    let n = f.values().len() as f64;
    Ok(f.values()
        .iter()
        .zip(reference.values())
        .map(|(&a, &b)| (a - b).as_f64().powi(2))
        .sum::<f64>()
        / n)
}

/// Relative L² error `‖f − ref‖ / ‖ref‖`.
pub fn relative_l2<T: Real>(f: &ScalarField<T>, reference: &ScalarField<T>) -> Result<f64> {
    let diff = f.zip_map(reference, |a, b| a - b)?;
    Ok(diff.norm().as_f64() / reference.norm().as_f64())
}

/// L² norm restricted to the cells where `mask` is true.
pub fn masked_l2<T: Real>(f: &ScalarField<T>, mask: &[bool]) -> f64 {
    let area = f.spec().cell_area();
    (f.values()
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(v, _)| v.as_f64().powi(2))
        .sum::<f64>()
        * area)
        .sqrt()
}

/// Staircase indicator: number of masked cells whose gradient magnitude
/// exceeds `factor` times the reference gradient magnitude at that cell
/// (plus `floor`, so flat reference regions do not count every wiggle).
///
/// Staircasing concentrates a smooth slope into isolated jumps: the
/// gradient histogram grows a spike at zero and a tail of large values.
/// This counts the tail.
pub fn staircase_spikes<T: Real>(
    f: &ScalarField<T>,
    reference: &ScalarField<T>,
    mask: &[bool],
    factor: f64,
    floor: f64,
) -> Result<usize> {
    f.spec().ensure_same(reference.spec(), "staircase metric")?;
    let g = gradient(f).magnitude();
    let gr = gradient(reference).magnitude();
    Ok(g.values()
        .iter()
        .zip(gr.values())
        .zip(mask)
        .filter(|((&a, &b), &m)| m && a.as_f64() > factor * b.as_f64() + floor)
        .count())
}
