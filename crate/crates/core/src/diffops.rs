//! Finite-difference operators and Gaussian smoothing on cell-centred grids.
//!
//! The gradient uses forward differences with a zero last difference along
//! each axis; the divergence is its exact negative adjoint (backward
//! differences). Convolution and the Laplacian reflect at the border
//! (half-sample symmetric), which makes `div ∘ grad` coincide with the
//! 5-point Laplacian.

use crate::error::{Error, Result};
pub use crate::grid::TensorField;
use crate::grid::{GridSpec, ScalarField, VectorField};
use crate::scalar::Real;

/// Forward-difference gradient; component 0 is `∂/∂x₀` (along columns).
pub fn gradient<T: Real>(f: &ScalarField<T>) -> VectorField<T> {
    let spec = *f.spec();
    let (rows, cols) = (spec.rows(), spec.cols());
    let [h0, h1] = spec.cell_size();
    let (ih0, ih1) = (T::lit(1.0 / h0), T::lit(1.0 / h1));
    let v = f.values();
    let mut d0 = vec![T::zero(); v.len()];
    let mut d1 = vec![T::zero(); v.len()];
    for i in 0..rows {
        let row = i * cols;
        for j in 0..cols - 1 {
            d0[row + j] = (v[row + j + 1] - v[row + j]) * ih0;
        }
        if i + 1 < rows {
            for j in 0..cols {
                d1[row + j] = (v[row + cols + j] - v[row + j]) * ih1;
            }
        }
    }
    VectorField::from_raw(spec, d0, d1)
}

/// Negative adjoint of [`gradient`]: `⟨∇f, g⟩ = −⟨f, div g⟩`.
pub fn divergence<T: Real>(g: &VectorField<T>) -> ScalarField<T> {
    let spec = *g.spec();
    let (rows, cols) = (spec.rows(), spec.cols());
    let [h0, h1] = spec.cell_size();
    let (ih0, ih1) = (T::lit(1.0 / h0), T::lit(1.0 / h1));
    let g0 = g.component(0).values();
    let g1 = g.component(1).values();
    let mut out = vec![T::zero(); spec.len()];
    for i in 0..rows {
        for j in 0..cols {
            let k = i * cols + j;
            let mut acc = T::zero();
            if j + 1 < cols {
                acc += g0[k];
            }
            if j > 0 {
                acc -= g0[k - 1];
            }
            let mut acc1 = T::zero();
            if i + 1 < rows {
                acc1 += g1[k];
            }
            if i > 0 {
                acc1 -= g1[k - cols];
            }
            out[k] = acc * ih0 + acc1 * ih1;
        }
    }
    ScalarField::from_raw(spec, out)
}

/// Component-wise gradient `E(v) = (∇v₀, ∇v₁)`.
pub fn component_gradient<T: Real>(v: &VectorField<T>) -> TensorField<T> {
    TensorField::new([gradient(v.component(0)), gradient(v.component(1))]).expect("components share a grid")
}

/// Negative adjoint of [`component_gradient`].
pub fn component_divergence<T: Real>(t: &TensorField<T>) -> VectorField<T> {
    VectorField::new(divergence(&t.row(0)), divergence(&t.row(1))).expect("rows share a grid")
}

/// Half-sample symmetric reflection of an index into `0..n`.
#[inline]
fn reflect(k: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut m = k.rem_euclid(period);
    if m >= n {
        m = period - 1 - m;
    }
    m as usize
}

/// 5-point Laplacian with reflected boundary.
pub fn laplacian<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    let spec = *f.spec();
    let (rows, cols) = (spec.rows(), spec.cols());
    let [h0, h1] = spec.cell_size();
    let (w0, w1) = (T::lit(1.0 / (h0 * h0)), T::lit(1.0 / (h1 * h1)));
    let two = T::lit(2.0);
    let v = f.values();
    let at = |i: isize, j: isize| v[reflect(i, rows) * cols + reflect(j, cols)];
    let mut out = Vec::with_capacity(v.len());
    for i in 0..rows as isize {
        for j in 0..cols as isize {
            let c = at(i, j);
            out.push((at(i, j + 1) + at(i, j - 1) - two * c) * w0 + (at(i + 1, j) + at(i - 1, j) - two * c) * w1);
        }
    }
    ScalarField::from_raw(spec, out)
}

/// Gaussian kernel parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    /// Standard deviation in physical units.
    pub sigma: f64,
    /// Kernel radius in multiples of sigma.
    pub truncation: f64,
}

impl KernelSpec {
    pub fn new(sigma: f64, truncation: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("kernel sigma {sigma} must be > 0")));
        }
        if !(truncation >= 2.0 && truncation.is_finite()) {
            return Err(Error::InvalidArgument(format!("kernel truncation {truncation} must be >= 2")));
        }
        Ok(KernelSpec { sigma, truncation })
    }

    pub fn with_sigma(sigma: f64) -> Result<Self> {
        Self::new(sigma, 4.0)
    }

    /// Normalized 1-D taps for a given cell size, centre tap in the middle.
    pub fn taps(&self, cell: f64) -> Vec<f64> {
        let s = self.sigma / cell;
        let radius = (self.truncation * s).ceil() as isize;
        let mut taps: Vec<f64> = (-radius..=radius).map(|k| (-(k * k) as f64 / (2.0 * s * s)).exp()).collect();
        let total: f64 = taps.iter().sum();
        taps.iter_mut().for_each(|t| *t /= total);
        taps
    }
}

fn convolve_axis<T: Real>(v: &[T], rows: usize, cols: usize, taps: &[T], along_cols: bool) -> Vec<T> {
    let radius = (taps.len() / 2) as isize;
    let mut out = vec![T::zero(); v.len()];
    for i in 0..rows {
        for j in 0..cols {
            let mut acc = T::zero();
            for (t, &w) in taps.iter().enumerate() {
                let off = t as isize - radius;
                let src = if along_cols {
                    i * cols + reflect(j as isize + off, cols)
                } else {
                    reflect(i as isize + off, rows) * cols + j
                };
                acc += w * v[src];
            }
            out[i * cols + j] = acc;
        }
    }
    out
}

/// Separable Gaussian smoothing with reflected boundary.
pub fn gaussian_smooth<T: Real>(f: &ScalarField<T>, k: &KernelSpec) -> ScalarField<T> {
    let spec: GridSpec = *f.spec();
    let [h0, h1] = spec.cell_size();
    let t0: Vec<T> = k.taps(h0).into_iter().map(T::lit).collect();
    let t1: Vec<T> = k.taps(h1).into_iter().map(T::lit).collect();
    let pass = convolve_axis(f.values(), spec.rows(), spec.cols(), &t0, true);
    let out = convolve_axis(&pass, spec.rows(), spec.cols(), &t1, false);
    ScalarField::from_raw(spec, out)
}
