//! Exponent maps from images: edges get `p = 1`, smooth regions `p → 2`.
//!
//! `l = Δ(G_{σ₁} ∗ f)`, `a = G_{σ₂} ∗ |l|`, `t = min{c·a, 1}`, `p = 2 − t`,
//! followed by snapping `(1, 1+δ)` to 1.

use crate::diffops::{gaussian_smooth, laplacian, KernelSpec};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::kernels::{ExponentMap, DEFAULT_DELTA_SNAP};
use crate::scalar::Real;
use crate::tomo::{fbp, FbpConfig, Sinogram};

/// How the scaling constant `c` is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EdgeScale {
    /// Fixed `c > 0`.
    Fixed(f64),
    /// `c = 1 / quantile_q(a)`, so a fraction `1 − q` of cells saturates at `t = 1`.
    Percentile(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentRecipe {
    /// Pre-Laplacian Gaussian width (physical units).
    pub sigma1: f64,
    /// Post-rectification Gaussian width (physical units), wider than `sigma1`.
    pub sigma2: f64,
    pub scale: EdgeScale,
    pub delta_snap: f64,
}

impl ExponentRecipe {
    pub fn new(sigma1: f64, sigma2: f64, scale: EdgeScale, delta_snap: f64) -> Result<Self> {
        if !(sigma1 > 0.0 && sigma2 > sigma1 && sigma2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "recipe needs 0 < sigma1 < sigma2, got {sigma1}, {sigma2}"
            )));
        }
        match scale {
            EdgeScale::Fixed(c) if !(c > 0.0 && c.is_finite()) => {
                return Err(Error::InvalidArgument(format!("edge scale c = {c} must be > 0")))
            }
            EdgeScale::Percentile(q) if !(q > 0.0 && q <= 1.0) => {
                return Err(Error::InvalidArgument(format!("edge percentile {q} must lie in (0, 1]")))
            }
            _ => {}
        }
        Ok(ExponentRecipe {
            sigma1,
            sigma2,
            scale,
            delta_snap,
        })
    }

    /// σ₁ = 1.5 cells, σ₂ = 5 cells, 95th-percentile scaling, δ = 0.05.
    pub fn default_for(spec: &GridSpec) -> Self {
        let h = spec.cell_size()[0].min(spec.cell_size()[1]);
        ExponentRecipe {
            sigma1: 1.5 * h,
            sigma2: 5.0 * h,
            scale: EdgeScale::Percentile(0.95),
            delta_snap: DEFAULT_DELTA_SNAP,
        }
    }

    /// Recipe with widths given in cells.
    pub fn in_cells(spec: &GridSpec, sigma1: f64, sigma2: f64, scale: EdgeScale, delta_snap: f64) -> Result<Self> {
        let h = spec.cell_size()[0].min(spec.cell_size()[1]);
        Self::new(sigma1 * h, sigma2 * h, scale, delta_snap)
    }
}

/// Intermediate images of the construction.
#[derive(Clone, Debug)]
pub struct ExponentStages<T> {
    /// Smoothed Laplacian `l`.
    pub laplacian: ScalarField<T>,
    /// Smoothed magnitude `a`.
    pub rectified: ScalarField<T>,
    /// `t = min{c·a, 1}`.
    pub threshold: ScalarField<T>,
    pub exponent: ExponentMap<T>,
    /// The constant `c` actually used.
    pub c: f64,
}

fn quantile<T: Real>(values: &[T], q: f64) -> T {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite field values"));
    let k = (q * (sorted.len() - 1) as f64).round() as usize;
    sorted[k.min(sorted.len() - 1)]
}

/// Runs the construction and returns every stage.
pub fn exponent_stages<T: Real>(f: &ScalarField<T>, recipe: &ExponentRecipe) -> Result<ExponentStages<T>> {
    let k1 = KernelSpec::with_sigma(recipe.sigma1)?;
    let k2 = KernelSpec::with_sigma(recipe.sigma2)?;
    let l = laplacian(&gaussian_smooth(f, &k1));
    let a = gaussian_smooth(&l.map(|v| v.abs()), &k2);
    let c = match recipe.scale {
        EdgeScale::Fixed(c) => c,
        EdgeScale::Percentile(q) => {
            let aq = quantile(a.values(), q).as_f64();
            if aq > 0.0 {
                1.0 / aq
            } else {
                1.0
            }
        }
    };
    let ct = T::lit(c);
    let t = a.map(|v| (ct * v).min(T::one()));
    let p = ExponentMap::from_field(t.map(|v| T::lit(2.0) - v), recipe.delta_snap)?;
    Ok(ExponentStages {
        laplacian: l,
        rectified: a,
        threshold: t,
        exponent: p,
        c,
    })
}

pub fn build_exponent<T: Real>(f: &ScalarField<T>, recipe: &ExponentRecipe) -> Result<ExponentMap<T>> {
    Ok(exponent_stages(f, recipe)?.exponent)
}

/// Single-channel data the exponent is bootstrapped from.
#[derive(Clone, Copy, Debug)]
pub enum BootstrapData<'a, T> {
    /// Denoising: the noisy image itself.
    Image(&'a ScalarField<T>),
    /// Tomography: a sinogram, reconstructed by FBP onto `spec` first.
    Sinogram {
        sinogram: &'a Sinogram<T>,
        fbp: &'a FbpConfig,
        spec: &'a GridSpec,
    },
}

/// Exponent from the same data that is being reconstructed.
pub fn bootstrap_exponent<T: Real>(data: BootstrapData<'_, T>, recipe: &ExponentRecipe) -> Result<ExponentMap<T>> {
    match data {
        BootstrapData::Image(f) => build_exponent(f, recipe),
        BootstrapData::Sinogram { sinogram, fbp: cfg, spec } => build_exponent(&fbp(sinogram, cfg, spec)?, recipe),
    }
}

/// Exponent from the FBP reconstruction of a secondary, higher-quality channel.
pub fn bimodal_exponent<T: Real>(
    secondary: &Sinogram<T>,
    cfg: &FbpConfig,
    spec: &GridSpec,
    recipe: &ExponentRecipe,
) -> Result<ExponentMap<T>> {
    build_exponent(&fbp(secondary, cfg, spec)?, recipe)
}
