//! First-order primal–dual reconstruction with squared-L² data fidelity
//! `D(Tf; g) = ‖Tf − g‖²` and TV, TVᵖ, Tikhonov or TGV² regularization.
//!
//! Every term is dualized: with `K = [T; ∇]` the iteration is
//!
//! ```text
//! y ← prox_{σF*}(y + σ K x̄)
//! x ← x − τ K* y
//! x̄ ← x + θ (x − x_prev)
//! ```
//!
//! and `τ = σ = step_scale / ‖K‖`, with `‖K‖` from power iteration.

mod config;
mod log;
mod opnorm;
mod primal_dual;

pub use config::{Initial, Observation, ProblemSpec, Regularizer, SolverConfig};
pub use log::{ConvergenceLog, LogRecord};
pub use opnorm::operator_norm;
pub use primal_dual::{objective, solve, solve_tgv2, tgv2_objective};
