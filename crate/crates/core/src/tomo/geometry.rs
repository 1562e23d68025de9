use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::scalar::Real;

/// Full-circle divergent-beam geometry with a flat detector.
///
/// At angle `β` the source sits at `R_s(cos β, sin β)`; the detector line is
/// perpendicular to the central ray at distance `R_d` on the opposite side
/// of the origin, with its axis along `(−sin β, cos β)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FanBeamGeometry {
    pub num_angles: usize,
    pub source_radius: f64,
    pub detector_radius: f64,
    pub num_detectors: usize,
    /// Physical width of the detector.
    pub detector_extent: f64,
}

impl FanBeamGeometry {
    pub fn new(
        num_angles: usize,
        source_radius: f64,
        detector_radius: f64,
        num_detectors: usize,
        detector_extent: f64,
    ) -> Result<Self> {
        if num_angles == 0 || num_detectors == 0 {
            return Err(Error::InvalidGeometry("need at least one angle and one detector cell".into()));
        }
        for (name, v) in [
            ("source_radius", source_radius),
            ("detector_radius", detector_radius),
            ("detector_extent", detector_extent),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidGeometry(format!("{name} = {v} must be > 0")));
            }
        }
        Ok(FanBeamGeometry {
            num_angles,
            source_radius,
            detector_radius,
            num_detectors,
            detector_extent,
        })
    }

    /// Source and detector at twice the image circumradius, detector 5 % wider
    /// than the shadow of the image disc.
    pub fn default_for(spec: &GridSpec, num_angles: usize, num_detectors: usize) -> Result<Self> {
        let r = spec.circumradius();
        let rs = 2.0 * r;
        let rd = rs;
        let width = 2.0 * shadow_half_width(rs, rd, r) * 1.05;
        let g = Self::new(num_angles, rs, rd, num_detectors, width)?;
        g.validate_for(spec)?;
        Ok(g)
    }

    /// Checks the source clears the image and the detector covers its shadow.
    pub fn validate_for(&self, spec: &GridSpec) -> Result<()> {
        let r = spec.circumradius();
        if !(self.source_radius > r) {
            return Err(Error::InvalidGeometry(format!(
                "source radius {} inside the image circumradius {r}",
                self.source_radius
            )));
        }
        let need = 2.0 * shadow_half_width(self.source_radius, self.detector_radius, r);
        if self.detector_extent < need {
            return Err(Error::InvalidGeometry(format!(
                "detector width {} does not cover the image shadow {need}",
                self.detector_extent
            )));
        }
        Ok(())
    }

    pub fn angle_step(&self) -> f64 {
        2.0 * PI / self.num_angles as f64
    }

    pub fn angle(&self, a: usize) -> f64 {
        a as f64 * self.angle_step()
    }

    pub fn detector_step(&self) -> f64 {
        self.detector_extent / self.num_detectors as f64
    }

    /// Signed offset of detector cell `k`'s centre along the detector axis.
    pub fn detector_offset(&self, k: usize) -> f64 {
        -0.5 * self.detector_extent + (k as f64 + 0.5) * self.detector_step()
    }

    /// Source-to-detector over source-to-origin distance.
    pub fn magnification(&self) -> f64 {
        (self.source_radius + self.detector_radius) / self.source_radius
    }

    /// Quadrature weight `Δβ·Δu` of one sinogram sample.
    pub fn sample_weight(&self) -> f64 {
        self.angle_step() * self.detector_step()
    }

    pub fn len(&self) -> usize {
        self.num_angles * self.num_detectors
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn shadow_half_width(rs: f64, rd: f64, r: f64) -> f64 {
    (rs + rd) * r / (rs * rs - r * r).max(f64::MIN_POSITIVE).sqrt()
}

/// Projection data, row-major `num_angles × num_detectors`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sinogram<T> {
    geometry: FanBeamGeometry,
    values: Vec<T>,
}

impl<T: Real> Sinogram<T> {
    pub fn new(geometry: FanBeamGeometry, values: Vec<T>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::InvalidGeometry(format!(
                "{} sinogram values for {}x{} geometry",
                values.len(),
                geometry.num_angles,
                geometry.num_detectors
            )));
        }
        crate::grid::ensure_finite(&values, "sinogram")?;
        Ok(Sinogram { geometry, values })
    }

    pub(crate) fn from_raw(geometry: FanBeamGeometry, values: Vec<T>) -> Self {
        Sinogram { geometry, values }
    }

    pub fn zeros(geometry: FanBeamGeometry) -> Self {
        Sinogram {
            geometry,
            values: vec![T::zero(); geometry.len()],
        }
    }

    pub fn geometry(&self) -> &FanBeamGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn row(&self, a: usize) -> &[T] {
        let n = self.geometry.num_detectors;
        &self.values[a * n..(a + 1) * n]
    }

    /// Quadrature inner product `Σ s t · Δβ·Δu`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        if self.geometry != other.geometry {
            return Err(Error::SpecMismatch("sinogram geometries differ".into()));
        }
        Ok(crate::grid::dot(&self.values, &other.values) * T::lit(self.geometry.sample_weight()))
    }

    pub fn norm_sq(&self) -> T {
        crate::grid::dot(&self.values, &self.values) * T::lit(self.geometry.sample_weight())
    }

    /// Sinogram as a grid field (rows = angles, unit cells), for image/CSV export.
    pub fn to_field(&self) -> crate::grid::ScalarField<T> {
        let spec = GridSpec::unit_cells(self.geometry.num_angles, self.geometry.num_detectors).expect("nonempty geometry");
        crate::grid::ScalarField::from_raw(spec, self.values.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_geometry_is_valid() {
        let spec = GridSpec::centered_square(128, 1.0).unwrap();
        let g = FanBeamGeometry::default_for(&spec, 180, 192).unwrap();
        assert!((g.source_radius - 2.0 * 2.0_f64.sqrt()).abs() < 1e-12);
        assert!(g.validate_for(&spec).is_ok());
        assert!((g.detector_offset(0) + g.detector_offset(191)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_geometry() {
        let spec = GridSpec::centered_square(16, 1.0).unwrap();
        assert!(FanBeamGeometry::new(0, 3.0, 3.0, 10, 5.0).is_err());
        assert!(FanBeamGeometry::new(10, 1.0, 3.0, 10, 50.0).unwrap().validate_for(&spec).is_err());
        assert!(FanBeamGeometry::new(10, 3.0, 3.0, 10, 0.5).unwrap().validate_for(&spec).is_err());
    }
}
