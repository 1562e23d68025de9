//! Scalar integrands of the variable-exponent modular, evaluated at a cell
//! norm `z = |F(x)|₂` and exponent `p = p(x)`.
//!
//! `p = 1` and `p = 2` use their closed forms; anything strictly between
//! goes through the implicit-equation solver in [`super::newton`].

use super::newton::{solve_unchecked, AlphaSolve, NewtonConfig};
use crate::error::{Error, Result};
use crate::scalar::{Extended, Real};

fn check_norm<T: Real>(z: T) -> Result<()> {
    if z >= T::zero() && z.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("norm {z} must be finite and >= 0")))
    }
}

fn check_exponent<T: Real>(p: T) -> Result<()> {
    if p >= T::one() && p <= T::lit(2.0) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("exponent {p} outside [1, 2]")))
    }
}

fn check_tau<T: Real>(tau: T) -> Result<()> {
    if tau > T::zero() && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("step {tau} must be finite and > 0")))
    }
}

/// `|z|^p`.
#[inline]
pub fn modular_integrand<T: Real>(z: T, p: T) -> T {
    if p == T::one() {
        z
    } else if p == T::lit(2.0) {
        z * z
    } else {
        z.powf(p)
    }
}

/// Convex-conjugate integrand `R(z, p)`: the unit-ball indicator for
/// `p = 1`, `z²/4` for `p = 2`, and `z^{p/(p−1)}[p^{−1/(p−1)} − p^{−p/(p−1)}]` otherwise.
pub fn conj_integrand<T: Real>(z: T, p: T) -> Result<Extended<T>> {
    check_norm(z)?;
    check_exponent(p)?;
    Ok(conj_integrand_unchecked(z, p))
}

#[inline]
pub(crate) fn conj_integrand_unchecked<T: Real>(z: T, p: T) -> Extended<T> {
    let one = T::one();
    if p == one {
        if z <= one {
            Extended::Finite(T::zero())
        } else {
            Extended::PosInfinity
        }
    } else if p == T::lit(2.0) {
        Extended::Finite(z * z * T::lit(0.25))
    } else {
        let q = one / (p - one);
        Extended::Finite(z.powf(p * q) * (p.powf(-q) - p.powf(-p * q)))
    }
}

/// Moreau-envelope integrand `T_τ(z, p)`.
pub fn moreau_integrand<T: Real>(z: T, p: T, tau: T, cfg: &NewtonConfig<T>) -> Result<T> {
    check_norm(z)?;
    check_exponent(p)?;
    check_tau(tau)?;
    Ok(moreau_integrand_solve(z, p, tau, cfg).0)
}

pub(crate) fn moreau_integrand_solve<T: Real>(z: T, p: T, tau: T, cfg: &NewtonConfig<T>) -> (T, Option<AlphaSolve<T>>) {
    let (one, two) = (T::one(), T::lit(2.0));
    if p == one {
        if z <= tau {
            (z * z / (two * tau), None)
        } else {
            (z - tau / two, None)
        }
    } else if p == two {
        (z * z / (one + two * tau), None)
    } else {
        let s = solve_unchecked(z, p, tau, cfg);
        let a = s.alpha;
        ((z - a) * (two * a + p * (z - a)) / (two * tau * p), Some(s))
    }
}

/// Proximal factor `U_τ(z, p)` of `τρ_p`: soft shrinkage for `p = 1`,
/// `z/(1+2τ)` for `p = 2`, `ᾱ(z, p, τ)` otherwise. Always in `[0, z]`.
pub fn prox_factor<T: Real>(z: T, p: T, tau: T, cfg: &NewtonConfig<T>) -> Result<T> {
    check_norm(z)?;
    check_exponent(p)?;
    check_tau(tau)?;
    Ok(prox_factor_solve(z, p, tau, cfg).0)
}

#[inline]
pub(crate) fn prox_factor_solve<T: Real>(z: T, p: T, tau: T, cfg: &NewtonConfig<T>) -> (T, Option<AlphaSolve<T>>) {
    let (one, two) = (T::one(), T::lit(2.0));
    if p == one {
        ((z - tau).max(T::zero()), None)
    } else if p == two {
        (z / (one + two * tau), None)
    } else {
        let s = solve_unchecked(z, p, tau, cfg);
        (s.alpha, Some(s))
    }
}

/// Proximal factor `V_τ(z, p)` of `τρ_p*`: `min{z, 1}` for `p = 1`,
/// `2z/(τ+2)` for `p = 2`, `z − ᾱ(z, p, τ^{1−p})` otherwise.
pub fn prox_factor_conj<T: Real>(z: T, p: T, tau: T, cfg: &NewtonConfig<T>) -> Result<T> {
    check_norm(z)?;
    check_exponent(p)?;
    check_tau(tau)?;
    Ok(prox_factor_conj_solve(z, p, tau, cfg).0)
}

#[inline]
pub(crate) fn prox_factor_conj_solve<T: Real>(
    z: T,
    p: T,
    tau: T,
    cfg: &NewtonConfig<T>,
) -> (T, Option<AlphaSolve<T>>) {
    let (one, two) = (T::one(), T::lit(2.0));
    if p == one {
        (z.min(one), None)
    } else if p == two {
        (two * z / (tau + two), None)
    } else {
        let s = solve_unchecked(z, p, tau.powf(one - p), cfg);
        ((z - s.alpha).max(T::zero()), Some(s))
    }
}
