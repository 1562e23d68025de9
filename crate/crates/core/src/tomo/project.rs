use rayon::prelude::*;

use crate::error::Result;
use crate::grid::{GridSpec, ScalarField};
use crate::scalar::Real;

use super::geometry::{FanBeamGeometry, Sinogram};

/// Angles per scatter buffer in the adjoint. Fixed so the reduction order
/// does not depend on the thread count.
const ADJOINT_CHUNK: usize = 8;

/// Calls `visit(cell, weight)` for every bilinear sample weight on ray
/// `(a, k)`, in a fixed order. Weights already include the step length.
pub(super) fn trace(geom: &FanBeamGeometry, spec: &GridSpec, a: usize, k: usize, mut visit: impl FnMut(usize, f64)) {
    let beta = geom.angle(a);
    let (sb, cb) = beta.sin_cos();
    let src = [geom.source_radius * cb, geom.source_radius * sb];
    let u = geom.detector_offset(k);
    let det = [-geom.detector_radius * cb - u * sb, -geom.detector_radius * sb + u * cb];
    let dir = [det[0] - src[0], det[1] - src[1]];

    // Liang–Barsky clip of src + t·dir, t ∈ [0, 1], against the extent.
    let ext = spec.extent();
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    for axis in 0..2 {
        let [lo, hi] = ext[axis];
        if dir[axis].abs() < 1e-300 {
            if src[axis] < lo || src[axis] > hi {
                return;
            }
            continue;
        }
        let ta = (lo - src[axis]) / dir[axis];
        let tb = (hi - src[axis]) / dir[axis];
        t0 = t0.max(ta.min(tb));
        t1 = t1.min(ta.max(tb));
    }
    if t1 <= t0 {
        return;
    }

    let full = dir[0].hypot(dir[1]);
    let len = (t1 - t0) * full;
    let [h0, h1] = spec.cell_size();
    let step = 0.5 * h0.min(h1);
    let n = (len / step).ceil().max(1.0) as usize;
    let ds = len / n as f64;
    let dt = (t1 - t0) / n as f64;
    let (rows, cols) = (spec.rows() as isize, spec.cols() as isize);

    for m in 0..n {
        let t = t0 + (m as f64 + 0.5) * dt;
        let jf = (src[0] + t * dir[0] - ext[0][0]) / h0 - 0.5;
        let if_ = (src[1] + t * dir[1] - ext[1][0]) / h1 - 0.5;
        let j0 = jf.floor();
        let i0 = if_.floor();
        let wj = jf - j0;
        let wi = if_ - i0;
        let (j0, i0) = (j0 as isize, i0 as isize);
        for (di, fi) in [(0, 1.0 - wi), (1, wi)] {
            let i = i0 + di;
            if i < 0 || i >= rows {
                continue;
            }
            for (dj, fj) in [(0, 1.0 - wj), (1, wj)] {
                let j = j0 + dj;
                if j < 0 || j >= cols {
                    continue;
                }
                visit((i * cols + j) as usize, fi * fj * ds);
            }
        }
    }
}

/// Divergent-beam ray transform: line integrals of the bilinear interpolant
/// of `f` along every source-to-detector-cell ray, sampled at half-cell steps.
pub fn forward<T: Real>(f: &ScalarField<T>, geom: &FanBeamGeometry) -> Result<Sinogram<T>> {
    geom.validate_for(f.spec())?;
    let spec = *f.spec();
    let nd = geom.num_detectors;
    let vals = f.values();
    let out: Vec<T> = (0..geom.len())
        .into_par_iter()
        .map(|r| {
            let mut acc = T::zero();
            trace(geom, &spec, r / nd, r % nd, |c, w| acc += T::lit(w) * vals[c]);
            acc
        })
        .collect();
    Ok(Sinogram::from_raw(*geom, out))
}

/// Adjoint of [`forward`] for the quadrature inner products
/// `⟨s, t⟩ = Σ s t Δβ Δu` on sinograms and `⟨f, g⟩ = Σ f g h₀ h₁` on images.
pub fn adjoint<T: Real>(s: &Sinogram<T>, spec: &GridSpec) -> Result<ScalarField<T>> {
    let geom = *s.geometry();
    geom.validate_for(spec)?;
    let chunks: Vec<Vec<T>> = (0..geom.num_angles.div_ceil(ADJOINT_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut buf = vec![T::zero(); spec.len()];
            let stop = ((c + 1) * ADJOINT_CHUNK).min(geom.num_angles);
            for a in c * ADJOINT_CHUNK..stop {
                for (k, &v) in s.row(a).iter().enumerate() {
                    if v == T::zero() {
                        continue;
                    }
                    trace(&geom, spec, a, k, |cell, w| buf[cell] += T::lit(w) * v);
                }
            }
            buf
        })
        .collect();
    let scale = T::lit(geom.sample_weight() / spec.cell_area());
    let mut out = vec![T::zero(); spec.len()];
    for buf in &chunks {
        for (o, &b) in out.iter_mut().zip(buf) {
            *o += b;
        }
    }
    for o in &mut out {
        *o *= scale;
    }
    Ok(ScalarField::from_raw(*spec, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::phantom::{tomo_grid, tomo_value};

    fn random_field(spec: GridSpec, rng: &mut ChaCha8Rng) -> ScalarField<f64> {
        let v = (0..spec.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        ScalarField::new(spec, v).unwrap()
    }

    #[test]
    fn zero_in_zero_out() {
        let spec = tomo_grid(32).unwrap();
        let g = FanBeamGeometry::default_for(&spec, 24, 40).unwrap();
        let s = forward(&ScalarField::<f64>::zeros(spec), &g).unwrap();
        assert!(s.values().iter().all(|&v| v == 0.0));
        let b = adjoint(&s, &spec).unwrap();
        assert!(b.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn central_ray_through_disc_is_its_diameter() {
        let spec = tomo_grid(128).unwrap();
        let r = 0.6;
        let f = ScalarField::<f64>::from_fn(spec, |x, y| if x.hypot(y) <= r { 1.0 } else { 0.0 }).unwrap();
        // odd detector count puts a cell centre on the central ray
        let g = FanBeamGeometry::default_for(&spec, 8, 191).unwrap();
        let s = forward(&f, &g).unwrap();
        for a in 0..8 {
            let v = s.row(a)[95];
            assert!((v - 2.0 * r).abs() <= 0.02 * 2.0 * r, "angle {a}: {v}");
        }
    }

    #[test]
    fn linear() {
        let spec = tomo_grid(24).unwrap();
        let g = FanBeamGeometry::default_for(&spec, 16, 30).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_field(spec, &mut rng);
        let h = random_field(spec, &mut rng);
        let (a, b) = (1.7, -0.4);
        let comb = f.zip_map(&h, |x, y| a * x + b * y).unwrap();
        let lhs = forward(&comb, &g).unwrap();
        let (sf, sh) = (forward(&f, &g).unwrap(), forward(&h, &g).unwrap());
        for ((l, x), y) in lhs.values().iter().zip(sf.values()).zip(sh.values()) {
            assert!((l - (a * x + b * y)).abs() <= 1e-10 * (1.0 + l.abs()));
        }
    }

    #[test]
    fn adjoint_pairs() {
        let spec = tomo_grid(20).unwrap();
        let g = FanBeamGeometry::default_for(&spec, 12, 28).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let f = random_field(spec, &mut rng);
            let sv = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s = Sinogram::new(g, sv).unwrap();
            let lhs = forward(&f, &g).unwrap().inner(&s).unwrap();
            let rhs = f.inner(&adjoint(&s, &spec).unwrap()).unwrap();
            let scale = forward(&f, &g).unwrap().norm_sq().sqrt() * s.norm_sq().sqrt();
            assert!((lhs - rhs).abs() <= 1e-6 * scale, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn backprojection_of_central_blob_peaks_at_centre() {
        let spec = tomo_grid(33).unwrap();
        let f = ScalarField::<f64>::from_fn(spec, |x, y| (-(x * x + y * y) / 0.005).exp()).unwrap();
        let g = FanBeamGeometry::default_for(&spec, 60, 64).unwrap();
        let b = adjoint(&forward(&f, &g).unwrap(), &spec).unwrap();
        let (arg, _) = b
            .values()
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (k, &v)| if v > best.1 { (k, v) } else { best });
        assert_eq!(arg, spec.index(16, 16));
        // decays monotonically along a radius
        let row: Vec<f64> = (16..33).map(|j| b.get(16, j)).collect();
        assert!(row.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn rotating_by_one_step_shifts_rows() {
        let spec = tomo_grid(128).unwrap();
        let num_angles = 180;
        let g = FanBeamGeometry::default_for(&spec, num_angles, 192).unwrap();
        let d = g.angle_step();
        let f = ScalarField::<f64>::from_fn(spec, tomo_value).unwrap();
        let (s, c) = d.sin_cos();
        // f rotated by +Δβ about the origin
        let rot = ScalarField::<f64>::from_fn(spec, |x, y| tomo_value(c * x + s * y, -s * x + c * y)).unwrap();
        let sf = forward(&f, &g).unwrap();
        let sr = forward(&rot, &g).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for a in 0..num_angles {
            let prev = (a + num_angles - 1) % num_angles;
            for (x, y) in sr.row(a).iter().zip(sf.row(prev)) {
                num += (x - y) * (x - y);
                den += y * y;
            }
        }
        let rel = (num / den).sqrt();
        assert!(rel <= 0.01, "relative row-shift mismatch {rel}");
    }

    #[test]
    fn deterministic_and_single_precision() {
        let spec = tomo_grid(32).unwrap();
        let g = FanBeamGeometry::default_for(&spec, 20, 40).unwrap();
        let f = ScalarField::<f64>::from_fn(spec, tomo_value).unwrap();
        let s = forward(&f, &g).unwrap();
        assert_eq!(adjoint(&s, &spec).unwrap(), adjoint(&s, &spec).unwrap());
        let s32 = forward(&f.cast::<f32>(), &g).unwrap();
        for (a, b) in s.values().iter().zip(s32.values()) {
            assert!((a - *b as f64).abs() < 1e-4 * (1.0 + a.abs()));
        }
    }
}
