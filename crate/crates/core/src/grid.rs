//! Cell-centred grid functions on a rectangle.
//!
//! Cell `(i, j)` (row `i`, column `j`) has its centre at
//! `(a₀ + (j+½)·h₀, a₁ + (i+½)·h₁)`: the first coordinate runs along columns,
//! the second along rows. Storage is row-major. Integrals are midpoint
//! quadrature, `Σ value · h₀·h₁`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Shape and physical extent of a 2-D grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    rows: usize,
    cols: usize,
    /// `[[x0_min, x0_max], [x1_min, x1_max]]`
    extent: [[f64; 2]; 2],
}

impl GridSpec {
    pub fn new(rows: usize, cols: usize, extent: [[f64; 2]; 2]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidGrid(format!("shape {rows}x{cols} has an empty axis")));
        }
        for (axis, [lo, hi]) in extent.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis} extent [{lo}, {hi}] must be finite with positive length"
                )));
            }
        }
        Ok(GridSpec { rows, cols, extent })
    }

    /// Square grid on `[-half, half]²`.
    pub fn centered_square(n: usize, half: f64) -> Result<Self> {
        Self::new(n, n, [[-half, half], [-half, half]])
    }

    /// Grid with unit cells, origin at the lower corner.
    pub fn unit_cells(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, [[0.0, cols as f64], [0.0, rows as f64]])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn extent(&self) -> [[f64; 2]; 2] {
        self.extent
    }

    /// Cell side lengths `(h₀, h₁)` along the first and second coordinate.
    pub fn cell_size(&self) -> [f64; 2] {
        [
            (self.extent[0][1] - self.extent[0][0]) / self.cols as f64,
            (self.extent[1][1] - self.extent[1][0]) / self.rows as f64,
        ]
    }

    pub fn cell_area(&self) -> f64 {
        let [h0, h1] = self.cell_size();
        h0 * h1
    }

    /// Physical centre of cell `(row, col)`.
    pub fn cell_center(&self, row: usize, col: usize) -> [f64; 2] {
        let [h0, h1] = self.cell_size();
        [
            self.extent[0][0] + (col as f64 + 0.5) * h0,
            self.extent[1][0] + (row as f64 + 0.5) * h1,
        ]
    }

    /// Largest distance from the origin to a corner of the extent.
    pub fn circumradius(&self) -> f64 {
        let mut r: f64 = 0.0;
        for &x0 in &self.extent[0] {
            for &x1 in &self.extent[1] {
                r = r.max(x0.hypot(x1));
            }
        }
        r
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpecMismatch(format!(
                "{what}: {}x{} {:?} vs {}x{} {:?}",
                self.rows, self.cols, self.extent, other.rows, other.cols, other.extent
            )))
        }
    }
}

pub(crate) fn ensure_finite<T: Real>(values: &[T], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(k) => Err(Error::NonFinite(format!("{what}: entry {k} is {}", values[k]))),
    }
}

/// Real-valued function on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    spec: GridSpec,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn new(spec: GridSpec, values: Vec<T>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a {}x{} grid",
                values.len(),
                spec.rows(),
                spec.cols()
            )));
        }
        ensure_finite(&values, "scalar field")?;
        Ok(ScalarField { spec, values })
    }

    /// Skips the finiteness scan; callers guarantee the invariant or check it later.
    pub(crate) fn from_raw(spec: GridSpec, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        ScalarField { spec, values }
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self::constant(spec, T::zero())
    }

    pub fn constant(spec: GridSpec, value: T) -> Self {
        ScalarField {
            spec,
            values: vec![value; spec.len()],
        }
    }

    /// Samples `f(x₀, x₁)` at every cell centre.
    pub fn from_fn(spec: GridSpec, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(spec.len());
        for i in 0..spec.rows() {
            for j in 0..spec.cols() {
                let [x0, x1] = spec.cell_center(i, j);
                values.push(T::lit(f(x0, x1)));
            }
        }
        Self::new(spec, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[self.spec.index(row, col)]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_raw(self.spec, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.spec.ensure_same(&other.spec, "zip_map")?;
        Ok(Self::from_raw(
            self.spec,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Dynamic range `max − min`.
    pub fn range(&self) -> T {
        self.max() - self.min()
    }

    /// Midpoint-quadrature inner product `Σ f g · h₀h₁`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.spec.ensure_same(&other.spec, "inner product")?;
        Ok(dot(&self.values, &other.values) * T::lit(self.spec.cell_area()))
    }

    /// Squared L² norm under midpoint quadrature.
    pub fn norm_sq(&self) -> T {
        dot(&self.values, &self.values) * T::lit(self.spec.cell_area())
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// Midpoint-quadrature integral.
    pub fn integral(&self) -> T {
        self.values.iter().copied().sum::<T>() * T::lit(self.spec.cell_area())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> ScalarField<U> {
        ScalarField::from_raw(self.spec, self.values.iter().map(|v| U::lit(v.as_f64())).collect())
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for ScalarField<T> {
    type Output = T;
    fn index(&self, (row, col): (usize, usize)) -> &T {
        &self.values[self.spec.index(row, col)]
    }
}

/// Two-component field (gradients, dual variables).
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField<T> {
    components: [ScalarField<T>; 2],
}

impl<T: Real> VectorField<T> {
    pub fn new(c0: ScalarField<T>, c1: ScalarField<T>) -> Result<Self> {
        c0.spec.ensure_same(&c1.spec, "vector field components")?;
        Ok(VectorField { components: [c0, c1] })
    }

    pub(crate) fn from_raw(spec: GridSpec, c0: Vec<T>, c1: Vec<T>) -> Self {
        VectorField {
            components: [ScalarField::from_raw(spec, c0), ScalarField::from_raw(spec, c1)],
        }
    }

    pub fn zeros(spec: GridSpec) -> Self {
        VectorField {
            components: [ScalarField::zeros(spec), ScalarField::zeros(spec)],
        }
    }

    pub fn spec(&self) -> &GridSpec {
        self.components[0].spec()
    }

    pub fn component(&self, k: usize) -> &ScalarField<T> {
        &self.components[k]
    }

    pub fn components(&self) -> &[ScalarField<T>; 2] {
        &self.components
    }

    pub fn into_components(self) -> [ScalarField<T>; 2] {
        self.components
    }

    /// Pointwise Euclidean norm `|F(x)|₂`.
    pub fn magnitude(&self) -> ScalarField<T> {
        let [a, b] = &self.components;
        ScalarField::from_raw(
            *self.spec(),
            a.values().iter().zip(b.values()).map(|(&x, &y)| x.hypot(y)).collect(),
        )
    }

    pub fn inner(&self, other: &Self) -> Result<T> {
        Ok(self.components[0].inner(&other.components[0])? + self.components[1].inner(&other.components[1])?)
    }

    pub fn norm_sq(&self) -> T {
        self.components[0].norm_sq() + self.components[1].norm_sq()
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }
}

/// 2×2 tensor field; entry `(a, b)` is the `b`-th derivative of component `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField<T> {
    components: [[ScalarField<T>; 2]; 2],
}

impl<T: Real> TensorField<T> {
    pub fn new(rows: [VectorField<T>; 2]) -> Result<Self> {
        rows[0].spec().ensure_same(rows[1].spec(), "tensor field rows")?;
        let [r0, r1] = rows;
        Ok(TensorField {
            components: [r0.into_components(), r1.into_components()],
        })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        let z = || ScalarField::zeros(spec);
        TensorField {
            components: [[z(), z()], [z(), z()]],
        }
    }

    pub fn spec(&self) -> &GridSpec {
        self.components[0][0].spec()
    }

    pub fn component(&self, a: usize, b: usize) -> &ScalarField<T> {
        &self.components[a][b]
    }

    /// Row `a` as the vector field `∇v_a`.
    pub fn row(&self, a: usize) -> VectorField<T> {
        VectorField {
            components: self.components[a].clone(),
        }
    }

    pub fn inner(&self, other: &Self) -> Result<T> {
        let mut acc = T::zero();
        for a in 0..2 {
            for b in 0..2 {
                acc += self.components[a][b].inner(&other.components[a][b])?;
            }
        }
        Ok(acc)
    }
}

/// Common view of scalar, vector and tensor fields as a stack of equally
/// shaped component arrays, so pointwise kernels operate on `|F(x)|₂`
/// regardless of the number of components.
pub trait CellField<T: Real>: Sized + Clone {
    fn spec(&self) -> &GridSpec;

    /// Component value slices, all of length `spec().len()`.
    fn component_slices(&self) -> Vec<&[T]>;

    /// Rebuilds a field of the same kind from component arrays.
    fn from_component_vecs(spec: GridSpec, comps: Vec<Vec<T>>) -> Self;

    /// Pointwise Euclidean norm over components.
    fn cell_norms(&self) -> Vec<T> {
        let comps = self.component_slices();
        (0..self.spec().len())
            .map(|k| {
                if comps.len() == 1 {
                    comps[0][k].abs()
                } else {
                    comps.iter().map(|c| c[k] * c[k]).sum::<T>().sqrt()
                }
            })
            .collect()
    }

    /// Multiplies every cell vector by the matching scale.
    fn scale_cells(&self, scales: &[T]) -> Self {
        let comps = self
            .component_slices()
            .iter()
            .map(|c| c.iter().zip(scales).map(|(&v, &s)| v * s).collect())
            .collect();
        Self::from_component_vecs(*self.spec(), comps)
    }
}

impl<T: Real> CellField<T> for ScalarField<T> {
    fn spec(&self) -> &GridSpec {
        &self.spec
    }
    fn component_slices(&self) -> Vec<&[T]> {
        vec![&self.values]
    }
    fn from_component_vecs(spec: GridSpec, mut comps: Vec<Vec<T>>) -> Self {
        ScalarField::from_raw(spec, comps.remove(0))
    }
}

impl<T: Real> CellField<T> for VectorField<T> {
    fn spec(&self) -> &GridSpec {
        VectorField::spec(self)
    }
    fn component_slices(&self) -> Vec<&[T]> {
        self.components.iter().map(|c| c.values()).collect()
    }
    fn from_component_vecs(spec: GridSpec, comps: Vec<Vec<T>>) -> Self {
        let mut it = comps.into_iter();
        VectorField::from_raw(spec, it.next().unwrap(), it.next().unwrap())
    }
}

impl<T: Real> CellField<T> for TensorField<T> {
    fn spec(&self) -> &GridSpec {
        TensorField::spec(self)
    }
    fn component_slices(&self) -> Vec<&[T]> {
        self.components.iter().flatten().map(|c| c.values()).collect()
    }
    fn from_component_vecs(spec: GridSpec, comps: Vec<Vec<T>>) -> Self {
        let mut it = comps.into_iter().map(|v| ScalarField::from_raw(spec, v));
        let mut next = || it.next().unwrap();
        TensorField {
            components: [[next(), next()], [next(), next()]],
        }
    }
}

/// Sequential dot product; fixed summation order keeps results reproducible.
pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_centres_and_sizes() {
        let spec = GridSpec::centered_square(4, 10.0).unwrap();
        assert_eq!(spec.cell_size(), [5.0, 5.0]);
        assert_eq!(spec.cell_center(0, 0), [-7.5, -7.5]);
        assert_eq!(spec.cell_center(1, 3), [7.5, -2.5]);
        assert_eq!(spec.cell_area(), 25.0);
    }

    #[test]
    fn rejects_degenerate_specs() {
        assert!(GridSpec::new(0, 3, [[0.0, 1.0], [0.0, 1.0]]).is_err());
        assert!(GridSpec::new(3, 3, [[1.0, 1.0], [0.0, 1.0]]).is_err());
        assert!(GridSpec::new(3, 3, [[0.0, 1.0], [0.0, f64::NAN]]).is_err());
    }

    #[test]
    fn rejects_non_finite_values() {
        let spec = GridSpec::unit_cells(1, 2).unwrap();
        assert!(ScalarField::new(spec, vec![0.0, f64::INFINITY]).is_err());
        assert!(ScalarField::new(spec, vec![0.0]).is_err());
    }

    #[test]
    fn quadrature_integral() {
        let spec = GridSpec::new(2, 2, [[0.0, 1.0], [0.0, 1.0]]).unwrap();
        let f = ScalarField::<f64>::constant(spec, 2.0);
        assert!((f.integral() - 2.0).abs() < 1e-15);
        assert!((f.norm_sq() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn cell_norms_over_components() {
        let spec = GridSpec::unit_cells(1, 2).unwrap();
        let v = VectorField::from_raw(spec, vec![3.0_f64, 0.0], vec![4.0, -2.0]);
        assert_eq!(v.cell_norms(), vec![5.0, 2.0]);
        assert_eq!(v.magnitude().values(), &[5.0, 2.0]);
    }
}
