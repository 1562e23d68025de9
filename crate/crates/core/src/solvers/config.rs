use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::kernels::ExponentMap;
use crate::scalar::Real;
use crate::tomo::{FbpConfig, Sinogram};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Weight of the TV, TVᵖ or Tikhonov term.
    pub lambda: f64,
    /// TGV² weight on `‖∇f − v‖`.
    pub lambda1: f64,
    /// TGV² weight on `‖E v‖`.
    pub lambda2: f64,
    pub iterations: usize,
    pub theta: f64,
    pub step_scale: f64,
    pub opnorm_power_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: 0.1,
            lambda1: 0.1,
            lambda2: 0.2,
            iterations: 500,
            theta: 1.0,
            step_scale: 0.9,
            opnorm_power_iters: 50,
        }
    }
}

impl SolverConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        SolverConfig {
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        for (name, v) in [("lambda", self.lambda), ("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be finite and >= 0"));
            }
        }
        if self.iterations == 0 {
            return bad("iterations must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return bad(format!("theta = {} must lie in [0, 1]", self.theta));
        }
        if !(self.step_scale > 0.0 && self.step_scale < 1.0) {
            return bad(format!("step_scale = {} must lie in (0, 1)", self.step_scale));
        }
        if self.opnorm_power_iters == 0 {
            return bad("opnorm_power_iters must be positive".into());
        }
        Ok(())
    }
}

/// Measured data; also fixes the forward operator.
#[derive(Clone, Debug)]
pub enum Observation<T> {
    /// Denoising: `T = I` on the image grid.
    Image(ScalarField<T>),
    /// Tomography: `T` is the ray transform of the sinogram's geometry onto `spec`.
    Sinogram { sinogram: Sinogram<T>, spec: GridSpec },
}

impl<T: Real> Observation<T> {
    /// Grid of the reconstruction.
    pub fn image_spec(&self) -> &GridSpec {
        match self {
            Observation::Image(f) => f.spec(),
            Observation::Sinogram { spec, .. } => spec,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Regularizer<T> {
    Tv,
    Tvp(ExponentMap<T>),
    Tgv2,
    /// `λ‖∇f‖²`
    Tikhonov,
}

impl<T> Regularizer<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Regularizer::Tv => "tv",
            Regularizer::Tvp(_) => "tvp",
            Regularizer::Tgv2 => "tgv2",
            Regularizer::Tikhonov => "tikhonov",
        }
    }
}

/// Starting primal iterate.
#[derive(Clone, Debug)]
pub enum Initial<T> {
    Zero,
    Fbp(FbpConfig),
    Given(ScalarField<T>),
}

impl<T> Initial<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Initial::Zero => "zero",
            Initial::Fbp(_) => "fbp",
            Initial::Given(_) => "given",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProblemSpec<T> {
    pub observation: Observation<T>,
    pub regularizer: Regularizer<T>,
    pub config: SolverConfig,
    pub initial: Initial<T>,
}

impl<T: Real> ProblemSpec<T> {
    /// Starts from zero for denoising and from the default FBP for tomography.
    pub fn new(observation: Observation<T>, regularizer: Regularizer<T>, config: SolverConfig) -> Self {
        let initial = match observation {
            Observation::Image(_) => Initial::Zero,
            Observation::Sinogram { .. } => Initial::Fbp(FbpConfig::default()),
        };
        ProblemSpec {
            observation,
            regularizer,
            config,
            initial,
        }
    }

    pub fn denoise(data: ScalarField<T>, regularizer: Regularizer<T>, config: SolverConfig) -> Self {
        Self::new(Observation::Image(data), regularizer, config)
    }

    pub fn tomography(sinogram: Sinogram<T>, spec: GridSpec, regularizer: Regularizer<T>, config: SolverConfig) -> Self {
        Self::new(Observation::Sinogram { sinogram, spec }, regularizer, config)
    }

    pub fn with_initial(mut self, initial: Initial<T>) -> Self {
        self.initial = initial;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let spec = self.observation.image_spec();
        if let Observation::Sinogram { sinogram, spec } = &self.observation {
            sinogram.geometry().validate_for(spec)?;
        }
        if let Regularizer::Tvp(p) = &self.regularizer {
            p.spec().ensure_same(spec, "exponent map vs image grid")?;
        }
        if let Initial::Given(f) = &self.initial {
            f.spec().ensure_same(spec, "initial iterate vs image grid")?;
        }
        Ok(())
    }
}
