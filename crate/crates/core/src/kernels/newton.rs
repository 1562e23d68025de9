//! Root finding for `α + τ·p·α^{p−1} = z` on `[0, z]`, `1 < p < 2`.
//!
//! `s(α) = α + τpα^{p−1} − z` is increasing and concave with a single root
//! in `(0, z)` for `z > 0`. Newton iterates
//! `α ← (z − p(2−p)τα^{p−1}) / (1 + τp(p−1)α^{p−2})` stay below the root and
//! increase monotonically once the first iterate is positive, which the
//! start value guarantees.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Stopping rule for the Newton solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonConfig<T> {
    /// Absolute residual tolerance on `s(α)`.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> NewtonConfig<T> {
    pub fn new(tol: T, max_iter: usize) -> Result<Self> {
        if !(tol > T::zero()) || max_iter == 0 {
            return Err(Error::InvalidArgument(format!(
                "newton tol {tol} must be > 0 and max_iter {max_iter} >= 1"
            )));
        }
        Ok(NewtonConfig { tol, max_iter })
    }
}

impl<T: Real> Default for NewtonConfig<T> {
    fn default() -> Self {
        NewtonConfig {
            tol: T::lit(T::NEWTON_TOL),
            max_iter: 20,
        }
    }
}

/// Maximum bisection steps when Newton does not reach the tolerance.
pub const BISECTION_MAX_ITER: usize = 200;

/// Iterates below this are replaced by bisection: `α^{p−2}` would overflow.
const ALPHA_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaSolve<T> {
    pub alpha: T,
    /// Newton steps taken (bisection steps not included).
    pub iterations: usize,
    /// Bisection fallback was used.
    pub fallback: bool,
    /// Final residual is within tolerance.
    pub converged: bool,
}

#[inline]
pub(crate) fn residual<T: Real>(alpha: T, z: T, p: T, tau: T) -> T {
    alpha + tau * p * alpha.powf(p - T::one()) - z
}

/// Start value: the `(2−p, p−1)` blend of the closed-form `p = 1` and
/// `p = 2` solutions, capped by `z` and by half the positivity bound
/// `(z / (τp(2−p)))^{1/(p−1)}`.
pub fn start_value<T: Real>(z: T, p: T, tau: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let alpha1 = (z - tau).max(T::zero());
    let alpha2 = z / (one + two * tau);
    let blend = (two - p) * alpha1 + (p - one) * alpha2;
    let bound = T::lit(0.5) * (z / (tau * p * (two - p))).powf(one / (p - one));
    blend.min(z).min(bound)
}

#[inline]
fn newton_step<T: Real>(alpha: T, z: T, p: T, tau: T) -> T {
    let one = T::one();
    let a_pm1 = alpha.powf(p - one);
    (z - p * (T::lit(2.0) - p) * tau * a_pm1) / (one + tau * p * (p - one) * a_pm1 / alpha)
}

fn validate<T: Real>(z: T, p: T, tau: T) -> Result<()> {
    if !(z >= T::zero() && z.is_finite()) {
        return Err(Error::InvalidArgument(format!("|z| = {z} must be finite and >= 0")));
    }
    if !(p > T::one() && p < T::lit(2.0)) {
        return Err(Error::InvalidArgument(format!("exponent {p} must lie strictly inside (1, 2)")));
    }
    if !(tau > T::zero() && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("tau = {tau} must be finite and > 0")));
    }
    Ok(())
}

/// Solves for `ᾱ` with residual `≤ cfg.tol`, falling back to bisection on
/// `[0, z]` if Newton stalls or leaves the valid range.
pub fn newton_alpha<T: Real>(z: T, p: T, tau: T, cfg: &NewtonConfig<T>) -> Result<AlphaSolve<T>> {
    validate(z, p, tau)?;
    Ok(solve_unchecked(z, p, tau, cfg))
}

pub(crate) fn solve_unchecked<T: Real>(z: T, p: T, tau: T, cfg: &NewtonConfig<T>) -> AlphaSolve<T> {
    if z == T::zero() {
        return AlphaSolve {
            alpha: T::zero(),
            iterations: 0,
            fallback: false,
            converged: true,
        };
    }
    let floor = T::lit(ALPHA_FLOOR);
    let mut alpha = start_value(z, p, tau);
    for k in 0..cfg.max_iter {
        if !(alpha >= floor) || !alpha.is_finite() {
            return bisect(z, p, tau, cfg, k);
        }
        if residual(alpha, z, p, tau).abs() <= cfg.tol {
            return AlphaSolve {
                alpha,
                iterations: k,
                fallback: false,
                converged: true,
            };
        }
        alpha = newton_step(alpha, z, p, tau);
    }
    if alpha >= floor && alpha.is_finite() && alpha < z && residual(alpha, z, p, tau).abs() <= cfg.tol {
        return AlphaSolve {
            alpha,
            iterations: cfg.max_iter,
            fallback: false,
            converged: true,
        };
    }
    bisect(z, p, tau, cfg, cfg.max_iter)
}

fn bisect<T: Real>(z: T, p: T, tau: T, cfg: &NewtonConfig<T>, iterations: usize) -> AlphaSolve<T> {
    let half = T::lit(0.5);
    let (mut lo, mut hi) = (T::zero(), z);
    let mut mid = half * z;
    for _ in 0..BISECTION_MAX_ITER {
        let next = half * (lo + hi);
        if next <= lo || next >= hi {
            break;
        }
        mid = next;
        let r = residual(mid, z, p, tau);
        if r.abs() <= cfg.tol {
            return AlphaSolve {
                alpha: mid,
                iterations,
                fallback: true,
                converged: true,
            };
        }
        if r > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    AlphaSolve {
        alpha: mid,
        iterations,
        fallback: true,
        converged: false,
    }
}

/// Exactly `iters` Newton steps from the start value, no residual checks.
/// This is the fixed-work protocol used for throughput measurements.
#[inline]
pub fn newton_alpha_fixed<T: Real>(z: T, p: T, tau: T, iters: usize) -> T {
    if z == T::zero() {
        return T::zero();
    }
    let mut alpha = start_value(z, p, tau);
    for _ in 0..iters {
        alpha = newton_step(alpha, z, p, tau);
    }
    alpha
}

/// The start value followed by `n` Newton iterates, for inspection.
pub fn newton_iterates<T: Real>(z: T, p: T, tau: T, n: usize) -> Result<Vec<T>> {
    validate(z, p, tau)?;
    let mut out = Vec::with_capacity(n + 1);
    let mut alpha = start_value(z, p, tau);
    out.push(alpha);
    for _ in 0..n {
        alpha = newton_step(alpha, z, p, tau);
        out.push(alpha);
    }
    Ok(out)
}
