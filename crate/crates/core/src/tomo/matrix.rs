use rayon::prelude::*;

use crate::error::Result;
use crate::grid::{GridSpec, ScalarField};
use crate::scalar::Real;

use super::geometry::{FanBeamGeometry, Sinogram};
use super::project::trace;

/// The ray transform of one geometry/grid pair stored as a sparse matrix,
/// row-compressed by ray and, for the adjoint, by cell.
///
/// Same operator as [`forward`](super::forward)/[`adjoint`](super::adjoint)
/// with repeated cells of a ray merged; worth building when the pair is
/// applied many times.
#[derive(Clone, Debug)]
pub struct SystemMatrix {
    geometry: FanBeamGeometry,
    spec: GridSpec,
    ray_ptr: Vec<usize>,
    ray_cells: Vec<u32>,
    ray_weights: Vec<f64>,
    cell_ptr: Vec<usize>,
    cell_rays: Vec<u32>,
    /// Transposed weights, already scaled by `w_Y / w_X`.
    cell_weights: Vec<f64>,
}

impl SystemMatrix {
    pub fn new(geometry: &FanBeamGeometry, spec: &GridSpec) -> Result<Self> {
        geometry.validate_for(spec)?;
        let nd = geometry.num_detectors;
        let rows: Vec<Vec<(u32, f64)>> = (0..geometry.len())
            .into_par_iter()
            .map(|r| {
                let mut entries: Vec<(u32, f64)> = Vec::new();
                trace(geometry, spec, r / nd, r % nd, |c, w| entries.push((c as u32, w)));
                entries.sort_by_key(|e| e.0);
                let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len() / 2);
                for (c, w) in entries {
                    match merged.last_mut() {
                        Some(last) if last.0 == c => last.1 += w,
                        _ => merged.push((c, w)),
                    }
                }
                merged
            })
            .collect();

        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut ray_ptr = Vec::with_capacity(rows.len() + 1);
        let mut ray_cells = Vec::with_capacity(nnz);
        let mut ray_weights = Vec::with_capacity(nnz);
        let mut counts = vec![0usize; spec.len()];
        ray_ptr.push(0);
        for row in &rows {
            for &(c, w) in row {
                ray_cells.push(c);
                ray_weights.push(w);
                counts[c as usize] += 1;
            }
            ray_ptr.push(ray_cells.len());
        }
        drop(rows);

        let mut cell_ptr = Vec::with_capacity(spec.len() + 1);
        cell_ptr.push(0);
        for c in &counts {
            cell_ptr.push(cell_ptr.last().unwrap() + c);
        }
        let scale = geometry.sample_weight() / spec.cell_area();
        let mut fill = cell_ptr[..spec.len()].to_vec();
        let mut cell_rays = vec![0u32; nnz];
        let mut cell_weights = vec![0.0; nnz];
        for r in 0..geometry.len() {
            for e in ray_ptr[r]..ray_ptr[r + 1] {
                let c = ray_cells[e] as usize;
                cell_rays[fill[c]] = r as u32;
                cell_weights[fill[c]] = ray_weights[e] * scale;
                fill[c] += 1;
            }
        }
        Ok(SystemMatrix {
            geometry: *geometry,
            spec: *spec,
            ray_ptr,
            ray_cells,
            ray_weights,
            cell_ptr,
            cell_rays,
            cell_weights,
        })
    }

    pub fn geometry(&self) -> &FanBeamGeometry {
        &self.geometry
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn nnz(&self) -> usize {
        self.ray_cells.len()
    }

    pub fn forward<T: Real>(&self, f: &ScalarField<T>) -> Result<Sinogram<T>> {
        f.spec().ensure_same(&self.spec, "system matrix forward")?;
        let v = f.values();
        let out: Vec<T> = (0..self.geometry.len())
            .into_par_iter()
            .map(|r| {
                let mut acc = T::zero();
                for e in self.ray_ptr[r]..self.ray_ptr[r + 1] {
                    acc += T::lit(self.ray_weights[e]) * v[self.ray_cells[e] as usize];
                }
                acc
            })
            .collect();
        Ok(Sinogram::from_raw(self.geometry, out))
    }

    pub fn adjoint<T: Real>(&self, s: &Sinogram<T>) -> Result<ScalarField<T>> {
        if s.geometry() != &self.geometry {
            return Err(crate::error::Error::SpecMismatch("sinogram geometry differs from the system matrix".into()));
        }
        let v = s.values();
        let out: Vec<T> = (0..self.spec.len())
            .into_par_iter()
            .map(|c| {
                let mut acc = T::zero();
                for e in self.cell_ptr[c]..self.cell_ptr[c + 1] {
                    acc += T::lit(self.cell_weights[e]) * v[self.cell_rays[e] as usize];
                }
                acc
            })
            .collect();
        Ok(ScalarField::from_raw(self.spec, out))
    }
}
