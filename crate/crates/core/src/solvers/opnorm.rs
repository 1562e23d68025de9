use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

const START_SEED: u64 = 0x5eed;

/// Power-iteration estimate of `‖K‖` from the normal operator `K*K`.
///
/// `normal` acts on flat primal vectors of length `dim`; the primal inner
/// product must be a uniform multiple of the Euclidean one. The start vector
/// comes from a fixed seed, so the estimate is reproducible.
pub fn operator_norm<T: Real>(
    dim: usize,
    iterations: usize,
    mut normal: impl FnMut(&[T]) -> Result<Vec<T>>,
) -> Result<f64> {
    if dim == 0 || iterations == 0 {
        return Err(Error::InvalidArgument("power iteration needs dim > 0 and iterations > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        let xt: Vec<T> = x.iter().map(|&v| T::lit(v)).collect();
        let y: Vec<f64> = normal(&xt)?.into_iter().map(|v| v.as_f64()).collect();
        // Rayleigh quotient of the unit vector
        estimate = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        if !estimate.is_finite() {
            return Err(Error::NonFinite("operator norm estimate".into()));
        }
        if y.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }
        x = y;
    }
    Ok(estimate.max(0.0).sqrt())
}
