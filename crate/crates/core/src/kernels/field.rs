//! Field-level functionals and proximal maps built from the pointwise
//! integrands: quadrature of the integrand over cells, or per-cell
//! rescaling `F(x) ↦ factor(|F(x)|₂, p(x)) · F(x)/|F(x)|₂` (0 where `F(x) = 0`).

use rayon::prelude::*;

use super::exponent_map::ExponentMap;
use super::newton::{AlphaSolve, NewtonConfig};
use super::pointwise::{
    conj_integrand_unchecked, modular_integrand, moreau_integrand_solve, prox_factor_conj_solve, prox_factor_solve,
};
use crate::error::{Error, Result};
use crate::grid::CellField;
use crate::scalar::{Extended, Real};

/// Newton bookkeeping accumulated over the cells of one kernel call.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NewtonStats {
    pub solves: usize,
    pub iterations: usize,
    pub fallbacks: usize,
    pub unconverged: usize,
}

impl NewtonStats {
    pub fn merge(&mut self, other: &NewtonStats) {
        self.solves += other.solves;
        self.iterations += other.iterations;
        self.fallbacks += other.fallbacks;
        self.unconverged += other.unconverged;
    }

    fn record<T>(&mut self, s: &Option<AlphaSolve<T>>) {
        if let Some(s) = s {
            self.solves += 1;
            self.iterations += s.iterations;
            self.fallbacks += s.fallback as usize;
            self.unconverged += !s.converged as usize;
        }
    }

    fn collect<T>(solves: &[Option<AlphaSolve<T>>]) -> Self {
        let mut stats = NewtonStats::default();
        solves.iter().for_each(|s| stats.record(s));
        stats
    }
}

fn check_spec<T: Real, F: CellField<T>>(f: &F, p: &ExponentMap<T>) -> Result<()> {
    f.spec().ensure_same(p.spec(), "field vs exponent map")
}

fn check_tau<T: Real>(tau: T) -> Result<()> {
    if tau > T::zero() && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("step {tau} must be finite and > 0")))
    }
}

/// `ρ_p(F) = ∫ |F(x)|₂^{p(x)} dx`.
pub fn modular<T: Real, F: CellField<T>>(f: &F, p: &ExponentMap<T>) -> Result<T> {
    check_spec(f, p)?;
    let area = T::lit(f.spec().cell_area());
    let norms = f.cell_norms();
    let sum: T = norms.iter().zip(p.values()).map(|(&z, &q)| modular_integrand(z, q)).sum();
    Ok(sum * area)
}

/// `ρ_p*(F) = ∫ R(|F(x)|₂, p(x)) dx`; `+∞` if any cell lies outside the indicator's ball.
pub fn conjugate<T: Real, F: CellField<T>>(f: &F, p: &ExponentMap<T>) -> Result<Extended<T>> {
    check_spec(f, p)?;
    let area = T::lit(f.spec().cell_area());
    let norms = f.cell_norms();
    let sum = norms
        .iter()
        .zip(p.values())
        .map(|(&z, &q)| conj_integrand_unchecked(z, q))
        .fold(Extended::Finite(T::zero()), |acc, r| acc + r);
    Ok(sum * area)
}

/// Moreau envelope `M_τ(ρ_p)(F)`.
pub fn moreau<T: Real, F: CellField<T>>(f: &F, p: &ExponentMap<T>, tau: T, cfg: &NewtonConfig<T>) -> Result<T> {
    check_spec(f, p)?;
    check_tau(tau)?;
    let area = T::lit(f.spec().cell_area());
    let norms = f.cell_norms();
    let cells: Vec<(T, Option<AlphaSolve<T>>)> = norms
        .par_iter()
        .zip(p.values().par_iter())
        .map(|(&z, &q)| moreau_integrand_solve(z, q, tau, cfg))
        .collect();
    Ok(cells.iter().map(|c| c.0).sum::<T>() * area)
}

fn rescale<T: Real, F: CellField<T>>(
    f: &F,
    p: &ExponentMap<T>,
    factor: impl Fn(T, T) -> (T, Option<AlphaSolve<T>>) + Sync,
) -> (F, NewtonStats) {
    let norms = f.cell_norms();
    let cells: Vec<(T, Option<AlphaSolve<T>>)> = norms
        .par_iter()
        .zip(p.values().par_iter())
        .map(|(&z, &q)| {
            if z == T::zero() {
                (T::zero(), None)
            } else {
                let (u, s) = factor(z, q);
                (u / z, s)
            }
        })
        .collect();
    let scales: Vec<T> = cells.iter().map(|c| c.0).collect();
    let solves: Vec<Option<AlphaSolve<T>>> = cells.into_iter().map(|c| c.1).collect();
    (f.scale_cells(&scales), NewtonStats::collect(&solves))
}

/// `prox_{τρ_p}(F)`.
pub fn prox_modular<T: Real, F: CellField<T>>(f: &F, p: &ExponentMap<T>, tau: T, cfg: &NewtonConfig<T>) -> Result<F> {
    Ok(prox_modular_stats(f, p, tau, cfg)?.0)
}

pub fn prox_modular_stats<T: Real, F: CellField<T>>(
    f: &F,
    p: &ExponentMap<T>,
    tau: T,
    cfg: &NewtonConfig<T>,
) -> Result<(F, NewtonStats)> {
    check_spec(f, p)?;
    check_tau(tau)?;
    Ok(rescale(f, p, |z, q| prox_factor_solve(z, q, tau, cfg)))
}

/// `prox_{τρ_p*}(F)`.
pub fn prox_conj<T: Real, F: CellField<T>>(f: &F, p: &ExponentMap<T>, tau: T, cfg: &NewtonConfig<T>) -> Result<F> {
    Ok(prox_conj_stats(f, p, tau, cfg)?.0)
}

pub fn prox_conj_stats<T: Real, F: CellField<T>>(
    f: &F,
    p: &ExponentMap<T>,
    tau: T,
    cfg: &NewtonConfig<T>,
) -> Result<(F, NewtonStats)> {
    check_spec(f, p)?;
    check_tau(tau)?;
    Ok(rescale(f, p, |z, q| prox_factor_conj_solve(z, q, tau, cfg)))
}

/// `prox_{σ(λρ_p)*}(F) = λ · prox_{(σ/λ)ρ_p*}(F/λ)`, using `(λρ)*(y) = λρ*(y/λ)`.
///
/// `λ = 0` makes the conjugate the indicator of `{0}`, whose prox is 0.
pub fn prox_conj_weighted_stats<T: Real, F: CellField<T>>(
    f: &F,
    p: &ExponentMap<T>,
    sigma: T,
    lambda: T,
    cfg: &NewtonConfig<T>,
) -> Result<(F, NewtonStats)> {
    check_spec(f, p)?;
    check_tau(sigma)?;
    if lambda == T::zero() {
        let zeros = vec![T::zero(); f.spec().len()];
        return Ok((f.scale_cells(&zeros), NewtonStats::default()));
    }
    if !(lambda > T::zero() && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("weight {lambda} must be finite and >= 0")));
    }
    let step = sigma / lambda;
    // F(x)/|F(x)| is scale-free, so the cell factor is λ·V(|F|/λ)/|F|.
    Ok(rescale(f, p, |z, q| {
        let (v, s) = prox_factor_conj_solve(z / lambda, q, step, cfg);
        (lambda * v, s)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, ScalarField, VectorField};

    fn unit_square(n: usize) -> GridSpec {
        GridSpec::new(n, n, [[0.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn modular_examples() {
        let spec = unit_square(4);
        let p15 = ExponentMap::constant(spec, 1.5).unwrap();
        assert_eq!(modular(&VectorField::<f64>::zeros(spec), &p15).unwrap(), 0.0);
        let ones = ScalarField::<f64>::constant(spec, 1.0);
        for q in [1.0, 1.3, 2.0] {
            let m = modular(&ones, &ExponentMap::constant(spec, q).unwrap()).unwrap();
            assert!((m - 1.0).abs() < 1e-14);
        }
        let twos = ScalarField::constant(spec, 2.0);
        assert!((modular(&twos, &p15).unwrap() - 2.0_f64.powf(1.5)).abs() < 1e-13);
    }

    #[test]
    fn conjugate_examples() {
        let spec = unit_square(3);
        let p1 = ExponentMap::constant(spec, 1.0).unwrap();
        let p2 = ExponentMap::constant(spec, 2.0).unwrap();
        assert_eq!(conjugate(&ScalarField::<f64>::zeros(spec), &p1).unwrap(), Extended::Finite(0.0));
        let small = ScalarField::constant(spec, 0.9);
        assert_eq!(conjugate(&small, &p1).unwrap(), Extended::Finite(0.0));
        let big = ScalarField::constant(spec, 2.0);
        assert_eq!(conjugate(&big, &p1).unwrap(), Extended::PosInfinity);
        let c = conjugate(&big, &p2).unwrap().finite().unwrap();
        assert!((c - 1.0).abs() < 1e-14);
    }

    #[test]
    fn moreau_examples() {
        let spec = unit_square(5);
        let cfg = NewtonConfig::default();
        let p2 = ExponentMap::constant(spec, 2.0).unwrap();
        assert_eq!(moreau(&ScalarField::<f64>::zeros(spec), &p2, 1.0, &cfg).unwrap(), 0.0);
        let m = moreau(&ScalarField::constant(spec, 1.0), &p2, 1.0, &cfg).unwrap();
        assert!((m - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn prox_of_zero_is_zero() {
        let spec = unit_square(3);
        let p = ExponentMap::constant(spec, 1.4).unwrap();
        let z = VectorField::<f64>::zeros(spec);
        let cfg = NewtonConfig::default();
        assert_eq!(prox_modular(&z, &p, 0.5, &cfg).unwrap(), z);
        assert_eq!(prox_conj(&z, &p, 0.5, &cfg).unwrap(), z);
    }

    #[test]
    fn p_one_is_vector_soft_thresholding_and_ball_projection() {
        let spec = GridSpec::unit_cells(1, 3).unwrap();
        let f = VectorField::<f64>::from_raw(spec, vec![3.0, 0.3, 0.0], vec![4.0, 0.4, -2.0]);
        let p1 = ExponentMap::constant(spec, 1.0).unwrap();
        let cfg = NewtonConfig::default();
        let out = prox_modular(&f, &p1, 1.0, &cfg).unwrap();
        // |F| = 5, 0.5, 2 -> shrink by 1 -> 4, 0, 1
        let expect0 = [3.0 * 4.0 / 5.0, 0.0, 0.0];
        let expect1 = [4.0 * 4.0 / 5.0, 0.0, -1.0];
        for k in 0..3 {
            assert!((out.component(0).values()[k] - expect0[k]).abs() < 1e-15);
            assert!((out.component(1).values()[k] - expect1[k]).abs() < 1e-15);
        }
        let proj = prox_conj(&f, &p1, 0.7, &cfg).unwrap();
        let norms = proj.cell_norms();
        assert!((norms[0] - 1.0).abs() < 1e-15);
        assert!((norms[1] - 0.5).abs() < 1e-15);
        assert!((norms[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spec_mismatch_and_bad_step() {
        let a = unit_square(3);
        let b = unit_square(4);
        let p = ExponentMap::constant(b, 1.5).unwrap();
        let f = ScalarField::<f64>::zeros(a);
        let cfg = NewtonConfig::default();
        assert!(modular(&f, &p).is_err());
        assert!(prox_modular(&f, &ExponentMap::constant(a, 1.5).unwrap(), 0.0, &cfg).is_err());
    }

    #[test]
    fn weighted_conjugate_prox_matches_definition() {
        let spec = GridSpec::unit_cells(1, 4).unwrap();
        let f = ScalarField::<f64>::new(spec, vec![0.3, -2.0, 5.0, 0.0]).unwrap();
        let p = ExponentMap::new(spec, vec![1.0, 1.5, 2.0, 1.7], 0.05).unwrap();
        let cfg = NewtonConfig::default();
        let (sigma, lambda) = (0.8, 2.5);
        let (out, _) = prox_conj_weighted_stats(&f, &p, sigma, lambda, &cfg).unwrap();
        let direct = prox_conj(&f.map(|v| v / lambda), &p, sigma / lambda, &cfg).unwrap().map(|v| v * lambda);
        for (a, b) in out.values().iter().zip(direct.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let (zero, _) = prox_conj_weighted_stats(&f, &p, sigma, 0.0, &cfg).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }
}
