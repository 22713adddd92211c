//! Splitting solvers for `minimize g(Ax - b)`.
//!
//! All three methods share the dual update
//! `u ← prox_{αg*}(u + α(A(2x⁺ - x) - b))` and differ in the primal step:
//!
//! | method | primal step |
//! |--------|-------------|
//! | NCS    | `x ← x - M⁺Aᵀu`, `M = γI + αC` with `C` circulant |
//! | PDHG   | `x ← x - γ⁻¹Aᵀu` |
//! | ADMM   | `x ← x - α⁻¹(AᵀA)⁺Aᵀu`, solved by a fixed number of CG steps |

mod cg;
mod iterate;
mod metric;
mod power;
mod problem;
mod record;
mod reference;
mod seminorm;

pub use cg::{cg, CgOutcome};
pub use iterate::{admm_cg_solve, ncs_solve, ncs_solve_with, ncs_step, pdhg_solve, SolveOutput, StepDelta};
pub use metric::Metric;
pub use power::{dominance_ratio, power_method};
pub use problem::{Block, SolverConfig, SolverState, SplitProblem};
pub use record::{ConvergenceRecord, RecordEntry, CSV_HEADER};
pub use reference::{compute_reference, compute_reference_cached, reference_key, Reference};
pub use seminorm::{rate_bound, seminorm_d, seminorm_from_parts, RADICAND_TOL};

/// Relative suboptimality `(f - f⋆) / max(1, |f⋆|)`.
pub fn relative_suboptimality(objective: f64, reference: f64) -> f64 {
    (objective - reference) / reference.abs().max(1.0)
}
