//! Oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use varlp::{GridSpec, ScalarField};

/// Dense 5-point Laplacian with half-sample reflection, built entry by entry.
pub fn dense_laplacian(spec: &GridSpec) -> DMatrix<f64> {
    let (rows, cols) = (spec.rows(), spec.cols());
    let [h0, h1] = spec.cell_size();
    let n = rows * cols;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..rows {
        for j in 0..cols {
            let k = i * cols + j;
            // a reflected neighbour is the cell itself, so its difference vanishes
            if j + 1 < cols {
                a[(k, k + 1)] += 1.0 / (h0 * h0);
                a[(k, k)] -= 1.0 / (h0 * h0);
            }
            if j > 0 {
                a[(k, k - 1)] += 1.0 / (h0 * h0);
                a[(k, k)] -= 1.0 / (h0 * h0);
            }
            if i + 1 < rows {
                a[(k, k + cols)] += 1.0 / (h1 * h1);
                a[(k, k)] -= 1.0 / (h1 * h1);
            }
            if i > 0 {
                a[(k, k - cols)] += 1.0 / (h1 * h1);
                a[(k, k)] -= 1.0 / (h1 * h1);
            }
        }
    }
    a
}

/// Minimizer of `‖f − g‖² + λ‖∇f‖²`: the normal equations read `(I − λΔ)f = g`.
pub fn tikhonov_oracle(g: &ScalarField, lambda: f64) -> ScalarField {
    let spec = *g.spec();
    let n = spec.len();
    let a = DMatrix::identity(n, n) - dense_laplacian(&spec) * lambda;
    let rhs = DVector::from_column_slice(g.values());
    let f = a.lu().solve(&rhs).expect("I - λΔ is positive definite");
    ScalarField::new(spec, f.as_slice().to_vec()).unwrap()
}

pub fn rel_l2(a: &ScalarField, b: &ScalarField) -> f64 {
    let num: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.values().iter().map(|y| y * y).sum();
    (num / den).sqrt()
}
