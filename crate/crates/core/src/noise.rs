//! Additive white Gaussian noise scaled to the dynamic range of the input.
//!
//! Normals come from `rand_distr::StandardNormal` (ziggurat, rand_distr 0.5.1)
//! driven by `rand_chacha::ChaCha8Rng` 0.9.0 seeded with `seed_from_u64`.
//! Both versions are pinned so a seed reproduces the same noise across builds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    /// Standard deviation as a fraction of `max − min` of the clean signal.
    pub level: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(level: f64, seed: u64) -> Result<Self> {
        if !(level.is_finite() && level >= 0.0) {
            return Err(Error::InvalidArgument(format!("noise level {level} must be >= 0")));
        }
        Ok(NoiseSpec { level, seed })
    }
}

/// Result of a noise injection.
#[derive(Clone, Debug)]
pub struct Noisy<V> {
    pub data: V,
    /// Set when the input had zero dynamic range and a positive level was requested;
    /// the data is then returned unchanged.
    pub degenerate_range: bool,
}

/// `values + level·(max − min)·ξ` with `ξ` i.i.d. standard normal from `spec.seed`.
pub fn add_noise_values<T: Real>(values: &[T], spec: &NoiseSpec) -> Noisy<Vec<T>> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v.as_f64()), hi.max(v.as_f64()))
        });
    let range = hi - lo;
    if spec.level == 0.0 {
        return Noisy {
            data: values.to_vec(),
            degenerate_range: false,
        };
    }
    if !(range > 0.0) {
        return Noisy {
            data: values.to_vec(),
            degenerate_range: true,
        };
    }
    let sigma = spec.level * range;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let data = values
        .iter()
        .map(|&v| {
            let xi: f64 = StandardNormal.sample(&mut rng);
            T::lit(v.as_f64() + sigma * xi)
        })
        .collect();
    Noisy {
        data,
        degenerate_range: false,
    }
}

pub fn add_noise<T: Real>(f: &ScalarField<T>, spec: &NoiseSpec) -> Noisy<ScalarField<T>> {
    let Noisy { data, degenerate_range } = add_noise_values(f.values(), spec);
    Noisy {
        data: ScalarField::from_raw(*f.spec(), data),
        degenerate_range,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn ramp(n: usize) -> ScalarField<f64> {
        let spec = GridSpec::new(n, n, [[0.0, 1.0], [0.0, 1.0]]).unwrap();
        ScalarField::from_fn(spec, |x0, _| x0).unwrap()
    }

    #[test]
    fn zero_level_is_identity() {
        let f = ramp(8);
        let out = add_noise(&f, &NoiseSpec::new(0.0, 3).unwrap());
        assert_eq!(out.data, f);
        assert!(!out.degenerate_range);
    }

    #[test]
    fn same_seed_same_output() {
        let f = ramp(16);
        let spec = NoiseSpec::new(0.1, 42).unwrap();
        let a = add_noise(&f, &spec).data;
        let b = add_noise(&f, &spec).data;
        assert_eq!(a.values(), b.values());
        let c = add_noise(&f, &NoiseSpec::new(0.1, 43).unwrap()).data;
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn sample_deviation_matches_level() {
        // 128x128 ramp over [0,1): range is close to 1, so sigma ≈ 0.1.
        let f = ramp(128);
        let range = f.range();
        let out = add_noise(&f, &NoiseSpec::new(0.1, 7).unwrap()).data;
        let diffs: Vec<f64> = out.values().iter().zip(f.values()).map(|(a, b)| a - b).collect();
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let sd = var.sqrt();
        assert!((sd - 0.1 * range).abs() < 0.01 * range, "sd = {sd}");
    }

    #[test]
    fn constant_input_flags_degenerate_range() {
        let spec = GridSpec::unit_cells(3, 3).unwrap();
        let f = ScalarField::<f64>::constant(spec, 2.0);
        let out = add_noise(&f, &NoiseSpec::new(0.2, 1).unwrap());
        assert!(out.degenerate_range);
        assert_eq!(out.data, f);
    }

    #[test]
    fn rejects_negative_level() {
        assert!(NoiseSpec::new(-0.1, 0).is_err());
    }
}
