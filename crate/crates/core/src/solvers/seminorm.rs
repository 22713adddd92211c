use super::metric::Metric;
use super::problem::SplitProblem;
use crate::error::{check_len, Error, Result};
use crate::ops::norm;

/// Negative radicands down to `-RADICAND_TOL·max(1, scale)` are rounding
/// noise and clamp to zero; `scale` is the sum of the term magnitudes.
pub const RADICAND_TOL: f64 = 1e-10;

fn clamp_radicand(value: f64, scale: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -RADICAND_TOL * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::DominanceViolation { radicand: value })
    }
}

/// `D(dx, du)` given a precomputed `a_dx = A·dx`:
/// `sqrt(‖du - α·a_dx‖² + α⟨dx, M dx⟩ - α²‖a_dx‖²)`.
pub fn seminorm_from_parts(
    dx: &[f64],
    du: &[f64],
    a_dx: &[f64],
    problem: &SplitProblem,
    metric: &Metric,
    alpha: f64,
) -> Result<f64> {
    let coupled: f64 = du
        .iter()
        .zip(a_dx)
        .map(|(u, a)| (u - alpha * a).powi(2))
        .sum();
    let (metric_part, scale) = metric_part(dx, a_dx, problem, metric, alpha);
    Ok(clamp_radicand(coupled + metric_part, coupled + scale)?.sqrt())
}

/// `α⟨dx, M dx⟩ - α²‖a_dx‖²` and the magnitude of its terms.
fn metric_part(dx: &[f64], a_dx: &[f64], problem: &SplitProblem, metric: &Metric, alpha: f64) -> (f64, f64) {
    if let Metric::ExactNormal { .. } = metric {
        return (0.0, 0.0);
    }
    let qm = alpha * metric.quad_form(dx, problem);
    let qa = alpha * alpha * a_dx.iter().map(|v| v * v).sum::<f64>();
    (qm - qa, qm.abs() + qa)
}

/// The D-seminorm of `(dx, du)` for the metric `M`:
/// `D²(x, u) = ‖u - αAx‖² + ‖x‖²_{αM - α²AᵀA}`.
pub fn seminorm_d(dx: &[f64], du: &[f64], problem: &SplitProblem, metric: &Metric, alpha: f64) -> Result<f64> {
    check_len(problem.domain_dim(), dx.len(), "seminorm dx")?;
    check_len(problem.range_dim(), du.len(), "seminorm du")?;
    let mut a_dx = vec![0.0; problem.range_dim()];
    problem.apply(dx, &mut a_dx);
    seminorm_from_parts(dx, du, &a_dx, problem, metric, alpha)
}

/// Worst-case bound on `g(Ax^{k+1} - b) - g(Ax⋆ - b)` for an
/// `L`-Lipschitz `g`:
/// `(‖u⁰-u⋆-αA(x⁰-x⋆)‖ + ‖u⋆‖ + L + ‖x⁰-x⋆‖_{αM-α²AᵀA})² / (α·sqrt(k+1))`.
#[allow(clippy::too_many_arguments)]
pub fn rate_bound(
    k: usize,
    x0: &[f64],
    u0: &[f64],
    x_star: &[f64],
    u_star: &[f64],
    lipschitz: f64,
    problem: &SplitProblem,
    metric: &Metric,
    alpha: f64,
) -> Result<f64> {
    check_len(problem.domain_dim(), x0.len(), "rate bound x0")?;
    check_len(problem.range_dim(), u0.len(), "rate bound u0")?;
    let dx: Vec<f64> = x0.iter().zip(x_star).map(|(a, b)| a - b).collect();
    let mut a_dx = vec![0.0; problem.range_dim()];
    problem.apply(&dx, &mut a_dx);
    let coupled = u0
        .iter()
        .zip(u_star)
        .zip(&a_dx)
        .map(|((u, s), a)| (u - s - alpha * a).powi(2))
        .sum::<f64>()
        .sqrt();
    let (mp, scale) = metric_part(&dx, &a_dx, problem, metric, alpha);
    let metric_norm = clamp_radicand(mp, scale)?.sqrt();
    let total = coupled + norm(u_star) + lipschitz + metric_norm;
    Ok(total * total / (alpha * ((k + 1) as f64).sqrt()))
}
