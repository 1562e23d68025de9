//! Variable-exponent Lebesgue modular `ρ_p(F) = ∫ |F(x)|^{p(x)} dx` with
//! `p(x) ∈ [1, 2]`: convex conjugate, Moreau envelope and proximal maps.

mod exponent_map;
mod field;
pub mod newton;
pub(crate) mod pointwise;

pub use exponent_map::{ExponentMap, DEFAULT_DELTA_SNAP};
pub use field::{
    conjugate, modular, moreau, prox_conj, prox_conj_stats, prox_conj_weighted_stats, prox_modular,
    prox_modular_stats, NewtonStats,
};
pub use newton::{newton_alpha, newton_alpha_fixed, newton_iterates, start_value, AlphaSolve, NewtonConfig};
pub use pointwise::{conj_integrand, modular_integrand, moreau_integrand, prox_factor, prox_factor_conj};
