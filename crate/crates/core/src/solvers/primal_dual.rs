use crate::diffops::{component_divergence, component_gradient, divergence, gradient};
use crate::error::{Error, Result};
use crate::grid::{CellField, GridSpec, ScalarField, TensorField, VectorField};
use crate::kernels::{modular, prox_conj_weighted_stats, ExponentMap, NewtonConfig};
use crate::scalar::Real;
use crate::tomo::{fbp, Sinogram, SystemMatrix};

use super::config::{Initial, Observation, ProblemSpec, Regularizer, SolverConfig};
use super::log::{ConvergenceLog, LogRecord};
use super::opnorm::operator_norm;

const LOG_EVERY: usize = 10;

/// Forward operator together with the data it is compared against.
struct DataTerm<'a, T> {
    spec: GridSpec,
    g: &'a [T],
    matrix: Option<SystemMatrix>,
    /// Quadrature weight of the data-space inner product.
    weight: f64,
}

impl<'a, T: Real> DataTerm<'a, T> {
    fn new(obs: &'a Observation<T>) -> Result<Self> {
        Ok(match obs {
            Observation::Image(g) => DataTerm {
                spec: *g.spec(),
                g: g.values(),
                matrix: None,
                weight: g.spec().cell_area(),
            },
            Observation::Sinogram { sinogram, spec } => DataTerm {
                spec: *spec,
                g: sinogram.values(),
                matrix: Some(SystemMatrix::new(sinogram.geometry(), spec)?),
                weight: sinogram.geometry().sample_weight(),
            },
        })
    }

    fn apply(&self, f: &ScalarField<T>) -> Result<Vec<T>> {
        match &self.matrix {
            None => Ok(f.values().to_vec()),
            Some(m) => Ok(m.forward(f)?.into_values()),
        }
    }

    fn adjoint(&self, y: Vec<T>) -> Result<ScalarField<T>> {
        match &self.matrix {
            None => Ok(ScalarField::from_raw(self.spec, y)),
            Some(m) => m.adjoint(&Sinogram::from_raw(*m.geometry(), y)),
        }
    }

    /// `‖Tf − g‖²`
    fn misfit(&self, tf: &[T]) -> f64 {
        let s: f64 = tf.iter().zip(self.g).map(|(&a, &b)| (a - b).as_f64().powi(2)).sum();
        s * self.weight
    }

    /// `prox_{σD*}(v) = (v − σg)/(1 + σ/2)` for `D = ‖· − g‖²`.
    fn dual_prox(&self, y: &[T], tf: &[T], sigma: T) -> Vec<T> {
        let denom = T::one() + sigma / T::lit(2.0);
        y.iter()
            .zip(tf)
            .zip(self.g)
            .map(|((&y, &t), &g)| (y + sigma * t - sigma * g) / denom)
            .collect()
    }

    fn dual_sq_dist(&self, a: &[T], b: &[T]) -> f64 {
        a.iter().zip(b).map(|(&x, &y)| (x - y).as_f64().powi(2)).sum::<f64>() * self.weight
    }
}

/// `sa·a + sb·b`, component-wise.
fn comb<T: Real, F: CellField<T>>(a: &F, sa: T, b: &F, sb: T) -> F {
    let comps = a
        .component_slices()
        .iter()
        .zip(b.component_slices())
        .map(|(x, y)| x.iter().zip(y).map(|(&u, &v)| sa * u + sb * v).collect())
        .collect();
    F::from_component_vecs(*a.spec(), comps)
}

/// Weighted squared distance in the primal space.
fn sq_dist<T: Real, F: CellField<T>>(a: &F, b: &F) -> f64 {
    let s: f64 = a
        .component_slices()
        .iter()
        .zip(b.component_slices())
        .map(|(x, y)| x.iter().zip(y).map(|(&u, &v)| (u - v).as_f64().powi(2)).sum::<f64>())
        .sum();
    s * a.spec().cell_area()
}

fn all_finite<T: Real, F: CellField<T>>(f: &F) -> bool {
    f.component_slices().iter().all(|c| c.iter().all(|v| v.is_finite()))
}

fn steps(cfg: &SolverConfig, norm: f64) -> Result<(f64, f64)> {
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Numeric(format!("operator norm estimate {norm} is not positive")));
    }
    let tau = cfg.step_scale / norm;
    let sigma = cfg.step_scale / norm;
    if tau * sigma * norm * norm > cfg.step_scale * cfg.step_scale * (1.0 + 1e-12) {
        return Err(Error::Numeric(format!("step sizes tau = {tau}, sigma = {sigma} violate tau*sigma*L^2 <= s^2")));
    }
    Ok((tau, sigma))
}

fn initial_iterate<T: Real>(prob: &ProblemSpec<T>, spec: GridSpec) -> Result<ScalarField<T>> {
    match (&prob.initial, &prob.observation) {
        (Initial::Zero, _) => Ok(ScalarField::zeros(spec)),
        (Initial::Given(f), _) => Ok(f.clone()),
        (Initial::Fbp(cfg), Observation::Sinogram { sinogram, spec }) => fbp(sinogram, cfg, spec),
        (Initial::Fbp(_), Observation::Image(_)) => {
            Err(Error::InvalidArgument("FBP initialization needs sinogram data".into()))
        }
    }
}

fn non_finite(iteration: usize, what: &str) -> Error {
    Error::NonFinite(format!("{what} became non-finite at iteration {iteration}"))
}

fn exponent_for<T: Real>(reg: &Regularizer<T>, spec: GridSpec) -> Result<ExponentMap<T>> {
    match reg {
        Regularizer::Tv => ExponentMap::constant(spec, T::one()),
        Regularizer::Tvp(p) => Ok(p.clone()),
        Regularizer::Tikhonov => ExponentMap::constant(spec, T::lit(2.0)),
        Regularizer::Tgv2 => Err(Error::InvalidArgument("TGV² has no single exponent map".into())),
    }
}

/// `‖Tf − g‖² + λ ρ_p(∇f)` with `p ≡ 1` for TV and `p ≡ 2` for Tikhonov.
pub fn objective<T: Real>(prob: &ProblemSpec<T>, f: &ScalarField<T>) -> Result<f64> {
    let spec = *prob.observation.image_spec();
    let p = exponent_for(&prob.regularizer, spec)?;
    let data = DataTerm::new(&prob.observation)?;
    objective_with(&data, &p, prob.config.lambda, f)
}

fn objective_with<T: Real>(data: &DataTerm<'_, T>, p: &ExponentMap<T>, lambda: f64, f: &ScalarField<T>) -> Result<f64> {
    let reg = if lambda == 0.0 { 0.0 } else { lambda * modular(&gradient(f), p)?.as_f64() };
    Ok(data.misfit(&data.apply(f)?) + reg)
}

/// `‖Tf − g‖² + λ₁ ρ₁(∇f − v) + λ₂ ρ₁(E v)`.
pub fn tgv2_objective<T: Real>(prob: &ProblemSpec<T>, f: &ScalarField<T>, v: &VectorField<T>) -> Result<f64> {
    let spec = *prob.observation.image_spec();
    let ones = ExponentMap::constant(spec, T::one())?;
    tgv2_objective_with(&DataTerm::new(&prob.observation)?, &ones, &prob.config, f, v)
}

fn tgv2_objective_with<T: Real>(
    data: &DataTerm<'_, T>,
    ones: &ExponentMap<T>,
    cfg: &SolverConfig,
    f: &ScalarField<T>,
    v: &VectorField<T>,
) -> Result<f64> {
    let r = comb(&gradient(f), T::one(), v, -T::one());
    let first = modular(&r, ones)?.as_f64();
    let second = modular(&component_gradient(v), ones)?.as_f64();
    Ok(data.misfit(&data.apply(f)?) + cfg.lambda1 * first + cfg.lambda2 * second)
}

/// Runs the primal–dual iteration for `prob` and returns the final primal
/// iterate. TGV² problems are delegated to [`solve_tgv2`].
pub fn solve<T: Real>(prob: &ProblemSpec<T>) -> Result<(ScalarField<T>, ConvergenceLog)> {
    prob.validate()?;
    if let Regularizer::Tgv2 = prob.regularizer {
        let (f, _, log) = solve_tgv2(prob)?;
        return Ok((f, log));
    }
    let spec = *prob.observation.image_spec();
    let cfg = &prob.config;
    let p = exponent_for(&prob.regularizer, spec)?;
    let data = DataTerm::new(&prob.observation)?;
    let newton = NewtonConfig::<T>::default();

    let norm = operator_norm(spec.len(), cfg.opnorm_power_iters, |x: &[T]| {
        let f = ScalarField::from_raw(spec, x.to_vec());
        let a = data.adjoint(data.apply(&f)?)?;
        let b = divergence(&gradient(&f));
        Ok(a.values().iter().zip(b.values()).map(|(&u, &v)| u - v).collect())
    })?;
    let (tau, sigma) = steps(cfg, norm)?;
    let (tt, ss) = (T::lit(tau), T::lit(sigma));
    let theta = T::lit(cfg.theta);
    let lambda = T::lit(cfg.lambda);

    let mut x = initial_iterate(prob, spec)?;
    let mut xbar = x.clone();
    let mut y0 = vec![T::zero(); data.g.len()];
    let mut y1 = VectorField::zeros(spec);
    let mut log = ConvergenceLog {
        operator_norm: norm,
        tau,
        sigma,
        initial: prob.initial.name().to_string(),
        ..Default::default()
    };
    log.records.push(LogRecord {
        iteration: 0,
        objective: objective_with(&data, &p, cfg.lambda, &x)?,
        primal_step: 0.0,
        dual_step: 0.0,
    });

    for k in 1..=cfg.iterations {
        let y0n = data.dual_prox(&y0, &data.apply(&xbar)?, ss);
        let v1 = comb(&y1, T::one(), &gradient(&xbar), ss);
        let (y1n, stats) = prox_conj_weighted_stats(&v1, &p, ss, lambda, &newton)?;
        log.newton.merge(&stats);

        let kty = data.adjoint(y0n.clone())?.zip_map(&divergence(&y1n), |a, b| a - b)?;
        let xn = comb(&x, T::one(), &kty, -tt);
        xbar = comb(&xn, T::one() + theta, &x, -theta);

        if k % LOG_EVERY == 0 || k == cfg.iterations {
            if !all_finite(&xn) {
                return Err(non_finite(k, "primal iterate"));
            }
            let objective = objective_with(&data, &p, cfg.lambda, &xn)?;
            if !objective.is_finite() {
                return Err(non_finite(k, "objective"));
            }
            log.records.push(LogRecord {
                iteration: k,
                objective,
                primal_step: sq_dist(&xn, &x).sqrt(),
                dual_step: (data.dual_sq_dist(&y0n, &y0) + sq_dist(&y1n, &y1)).sqrt(),
            });
        }
        x = xn;
        y0 = y0n;
        y1 = y1n;
    }
    Ok((x, log))
}

fn split3<T: Real>(spec: GridSpec, x: &[T]) -> (ScalarField<T>, VectorField<T>) {
    let n = spec.len();
    let f = ScalarField::from_raw(spec, x[..n].to_vec());
    let v = VectorField::from_raw(spec, x[n..2 * n].to_vec(), x[2 * n..].to_vec());
    (f, v)
}

/// TGV² reconstruction on the product space `(f, v)` with
/// `K(f, v) = (Tf, ∇f − v, E v)`. Returns `f`, the auxiliary field `v` and the log.
pub fn solve_tgv2<T: Real>(prob: &ProblemSpec<T>) -> Result<(ScalarField<T>, VectorField<T>, ConvergenceLog)> {
    prob.validate()?;
    if !matches!(prob.regularizer, Regularizer::Tgv2) {
        return Err(Error::InvalidArgument(format!(
            "solve_tgv2 called with regularizer {}",
            prob.regularizer.name()
        )));
    }
    let spec = *prob.observation.image_spec();
    let cfg = &prob.config;
    let data = DataTerm::new(&prob.observation)?;
    let newton = NewtonConfig::<T>::default();
    let ones = ExponentMap::constant(spec, T::one())?;

    let norm = operator_norm(3 * spec.len(), cfg.opnorm_power_iters, |x: &[T]| {
        let (f, v) = split3(spec, x);
        let r = comb(&gradient(&f), T::one(), &v, -T::one());
        let a = data.adjoint(data.apply(&f)?)?.zip_map(&divergence(&r), |a, b| a - b)?;
        let b = comb(&r, -T::one(), &component_divergence(&component_gradient(&v)), -T::one());
        let mut out = a.into_values();
        for c in b.into_components() {
            out.extend(c.into_values());
        }
        Ok(out)
    })?;
    let (tau, sigma) = steps(cfg, norm)?;
    let (tt, ss) = (T::lit(tau), T::lit(sigma));
    let theta = T::lit(cfg.theta);
    let (l1, l2) = (T::lit(cfg.lambda1), T::lit(cfg.lambda2));

    let mut f = initial_iterate(prob, spec)?;
    let mut v = VectorField::zeros(spec);
    let (mut fbar, mut vbar) = (f.clone(), v.clone());
    let mut y0 = vec![T::zero(); data.g.len()];
    let mut y1 = VectorField::zeros(spec);
    let mut y2 = TensorField::zeros(spec);
    let mut log = ConvergenceLog {
        operator_norm: norm,
        tau,
        sigma,
        initial: prob.initial.name().to_string(),
        ..Default::default()
    };
    log.records.push(LogRecord {
        iteration: 0,
        objective: tgv2_objective_with(&data, &ones, cfg, &f, &v)?,
        primal_step: 0.0,
        dual_step: 0.0,
    });

    for k in 1..=cfg.iterations {
        let y0n = data.dual_prox(&y0, &data.apply(&fbar)?, ss);
        let r = comb(&gradient(&fbar), T::one(), &vbar, -T::one());
        let (y1n, s1) = prox_conj_weighted_stats(&comb(&y1, T::one(), &r, ss), &ones, ss, l1, &newton)?;
        let e = component_gradient(&vbar);
        let (y2n, s2) = prox_conj_weighted_stats(&comb(&y2, T::one(), &e, ss), &ones, ss, l2, &newton)?;
        log.newton.merge(&s1);
        log.newton.merge(&s2);

        let kf = data.adjoint(y0n.clone())?.zip_map(&divergence(&y1n), |a, b| a - b)?;
        let kv = comb(&y1n, -T::one(), &component_divergence(&y2n), -T::one());
        let fnew = comb(&f, T::one(), &kf, -tt);
        let vnew = comb(&v, T::one(), &kv, -tt);
        fbar = comb(&fnew, T::one() + theta, &f, -theta);
        vbar = comb(&vnew, T::one() + theta, &v, -theta);

        if k % LOG_EVERY == 0 || k == cfg.iterations {
            if !all_finite(&fnew) || !all_finite(&vnew) {
                return Err(non_finite(k, "primal iterate"));
            }
            let objective = tgv2_objective_with(&data, &ones, cfg, &fnew, &vnew)?;
            if !objective.is_finite() {
                return Err(non_finite(k, "objective"));
            }
            log.records.push(LogRecord {
                iteration: k,
                objective,
                primal_step: (sq_dist(&fnew, &f) + sq_dist(&vnew, &v)).sqrt(),
                dual_step: (data.dual_sq_dist(&y0n, &y0) + sq_dist(&y1n, &y1) + sq_dist(&y2n, &y2)).sqrt(),
            });
        }
        f = fnew;
        v = vnew;
        y0 = y0n;
        y1 = y1n;
        y2 = y2n;
    }
    Ok((f, v, log))
}
