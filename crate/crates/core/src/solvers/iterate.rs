use std::time::Instant;

use super::cg::cg;
use super::metric::Metric;
use super::power::{dominance_ratio, power_method};
use super::problem::{SolverConfig, SolverState, SplitProblem};
use super::record::{ConvergenceRecord, RecordEntry};
use super::relative_suboptimality;
use super::seminorm::seminorm_from_parts;
use crate::error::{Error, Result};
use crate::ops::NormalMap;

/// Successive differences of one step: `x⁺ - x`, `u⁺ - u`, `A(x⁺ - x)`.
#[derive(Clone, Debug)]
pub struct StepDelta {
    pub dx: Vec<f64>,
    pub du: Vec<f64>,
    pub a_dx: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SolveOutput {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub record: ConvergenceRecord,
    pub warnings: Vec<String>,
}

const POWER_SEED: u64 = 0x5eed;

fn ensure_finite(v: &[f64], iterate: &'static str, iteration: usize) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence { iterate, iteration })
    }
}

/// Given `x⁺` (in `x_new`), finish the step: the dual update
/// `u⁺ = prox_{αg*}(u + α(A(2x⁺ - x) - b))` and the state swap.
fn finish_step(state: &mut SolverState, problem: &SplitProblem, alpha: f64, x_new: Vec<f64>) -> Result<StepDelta> {
    let iteration = state.iteration + 1;
    ensure_finite(&x_new, "x", iteration)?;
    let mut ax_new = vec![0.0; problem.range_dim()];
    problem.apply(&x_new, &mut ax_new);

    let mut u_new = vec![0.0; problem.range_dim()];
    let mut z = Vec::new();
    for (i, block) in problem.blocks().iter().enumerate() {
        let r = problem.block_range(i);
        z.clear();
        z.extend(
            r.clone()
                .zip(&block.offset)
                .map(|(j, o)| state.u[j] + alpha * (2.0 * ax_new[j] - state.ax[j] - o)),
        );
        block.prox.prox_conj(&z, alpha, &mut u_new[r]);
    }
    ensure_finite(&u_new, "u", iteration)?;

    let dx = x_new.iter().zip(&state.x).map(|(a, b)| a - b).collect();
    let du = u_new.iter().zip(&state.u).map(|(a, b)| a - b).collect();
    let a_dx = ax_new.iter().zip(&state.ax).map(|(a, b)| a - b).collect();
    state.x = x_new;
    state.u = u_new;
    state.ax = ax_new;
    state.iteration = iteration;
    Ok(StepDelta { dx, du, a_dx })
}

/// One NCS iteration: `x⁺ = x - M⁺Aᵀu`, then the dual update.
pub fn ncs_step(state: &mut SolverState, problem: &SplitProblem, metric: &Metric, alpha: f64) -> Result<StepDelta> {
    let mut g = vec![0.0; problem.domain_dim()];
    problem.apply_adjoint(&state.u, &mut g);
    let mut d = vec![0.0; problem.domain_dim()];
    metric.apply_pinv(&g, &mut d)?;
    let x_new = state.x.iter().zip(&d).map(|(x, d)| x - d).collect();
    finish_step(state, problem, alpha, x_new)
}

/// One inexact ADMM iteration: `AᵀA·d = Aᵀu` by `n_cg` CG steps from zero,
/// `x⁺ = x - d/α`, then the dual update.
fn admm_cg_step(state: &mut SolverState, problem: &SplitProblem, alpha: f64, n_cg: usize) -> Result<(StepDelta, bool)> {
    let mut g = vec![0.0; problem.domain_dim()];
    problem.apply_adjoint(&state.u, &mut g);
    let outcome = cg(&NormalMap::new(problem), &g, n_cg);
    let x_new = state.x.iter().zip(&outcome.x).map(|(x, d)| x - d / alpha).collect();
    Ok((finish_step(state, problem, alpha, x_new)?, outcome.breakdown))
}

struct Recorder<'a> {
    problem: &'a SplitProblem,
    config: &'a SolverConfig,
    seminorm_metric: &'a Metric,
    axis_scale: usize,
    start: Instant,
    record: ConvergenceRecord,
    warnings: Vec<String>,
    seminorm_warned: bool,
}

impl Recorder<'_> {
    /// Records iteration `k` if due; returns true when the stopping
    /// threshold has been reached.
    fn observe(&mut self, state: &SolverState, delta: &StepDelta) -> bool {
        let k = state.iteration;
        if k % self.config.record_every != 0 && k != self.config.max_iters {
            return false;
        }
        let objective = self.problem.reported_objective(&state.x, &state.ax);
        let rel_subopt = self
            .config
            .reference_objective
            .map_or(f64::NAN, |r| relative_suboptimality(objective, r));
        let seminorm_step = if self.config.record_seminorm {
            match seminorm_from_parts(
                &delta.dx,
                &delta.du,
                &delta.a_dx,
                self.problem,
                self.seminorm_metric,
                self.config.alpha,
            ) {
                Ok(v) => v,
                Err(e) => {
                    if !self.seminorm_warned {
                        self.warn(format!("seminorm at iteration {k}: {e}"));
                        self.seminorm_warned = true;
                    }
                    f64::NAN
                }
            }
        } else {
            f64::NAN
        };
        self.record.push(RecordEntry {
            iter: k * self.axis_scale,
            objective,
            rel_subopt,
            seminorm_step,
            wall_ms: self.start.elapsed().as_secs_f64() * 1e3,
        });
        self.config.stop_below.is_some_and(|t| rel_subopt <= t)
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }
}

fn dominance_warning(problem: &SplitProblem, metric: &Metric, config: &SolverConfig) -> Result<Option<String>> {
    if config.check_iters == 0 {
        return Ok(None);
    }
    let ratio = dominance_ratio(problem, metric, config.alpha, config.check_iters, POWER_SEED)?;
    Ok((ratio > 1.0).then(|| {
        format!("metric may not dominate αAᵀA: estimated λ_max(αM⁺ᐟ²AᵀAM⁺ᐟ²) = {ratio:.6}")
    }))
}

/// NCS with the metric `M = γI + αC` built from `config`.
pub fn ncs_solve(problem: &SplitProblem, config: &SolverConfig) -> Result<SolveOutput> {
    let metric = Metric::from_config(config, problem.domain_dim())?;
    ncs_solve_with(problem, config, &metric, SolverState::zeros(problem))
}

/// NCS with an explicit metric and starting point.
pub fn ncs_solve_with(
    problem: &SplitProblem,
    config: &SolverConfig,
    metric: &Metric,
    mut state: SolverState,
) -> Result<SolveOutput> {
    config.validate()?;
    let mut rec = Recorder {
        problem,
        config,
        seminorm_metric: metric,
        axis_scale: 1,
        start: Instant::now(),
        record: ConvergenceRecord::new(),
        warnings: Vec::new(),
        seminorm_warned: false,
    };
    if !matches!(metric, Metric::ExactNormal { .. }) {
        if let Some(w) = dominance_warning(problem, metric, config)? {
            rec.warn(w);
        }
    }
    for _ in 0..config.max_iters {
        let delta = ncs_step(&mut state, problem, metric, config.alpha)?;
        if rec.observe(&state, &delta) {
            break;
        }
    }
    Ok(SolveOutput {
        x: state.x,
        u: state.u,
        record: rec.record,
        warnings: rec.warnings,
    })
}

/// PDHG: NCS with `M = γI`; any mask in `config` is ignored.
pub fn pdhg_solve(problem: &SplitProblem, config: &SolverConfig) -> Result<SolveOutput> {
    let mut config = config.clone();
    config.mask = None;
    config.validate()?;
    let metric = Metric::ScaledIdentity { gamma: config.gamma };
    let mut warnings = Vec::new();
    if config.check_iters > 0 {
        let lmax = power_method(&NormalMap::new(problem), config.check_iters, POWER_SEED);
        if config.gamma / config.alpha < lmax {
            let msg = format!(
                "PDHG step condition violated: γ/α = {:.6e} < λ_max(AᵀA) ≈ {lmax:.6e}",
                config.gamma / config.alpha
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    config.check_iters = 0;
    let mut out = ncs_solve_with(problem, &config, &metric, SolverState::zeros(problem))?;
    warnings.append(&mut out.warnings);
    out.warnings = warnings;
    Ok(out)
}

/// ADMM with the x-subproblem solved inexactly by `n_cg` CG steps. The
/// record's iteration axis counts CG iterations (`n_cg` per outer loop);
/// its seminorm column uses `M = αAᵀA`.
pub fn admm_cg_solve(problem: &SplitProblem, config: &SolverConfig, n_cg: usize) -> Result<SolveOutput> {
    if n_cg == 0 {
        return Err(Error::invalid("n_cg", "at least one CG iteration is required"));
    }
    let mut config = config.clone();
    config.mask = None;
    if !(config.alpha > 0.0 && config.alpha.is_finite()) {
        return Err(Error::invalid("alpha", "must be positive"));
    }
    let metric = Metric::ExactNormal { alpha: config.alpha };
    let mut rec = Recorder {
        problem,
        config: &config,
        seminorm_metric: &metric,
        axis_scale: n_cg,
        start: Instant::now(),
        record: ConvergenceRecord::new(),
        warnings: Vec::new(),
        seminorm_warned: false,
    };
    let mut state = SolverState::zeros(problem);
    let mut breakdowns = 0usize;
    for _ in 0..config.max_iters {
        let (delta, breakdown) = admm_cg_step(&mut state, problem, config.alpha, n_cg)?;
        breakdowns += usize::from(breakdown);
        if rec.observe(&state, &delta) {
            break;
        }
    }
    if breakdowns > 0 {
        rec.warn(format!("CG stopped early on nonpositive curvature in {breakdowns} outer iterations"));
    }
    Ok(SolveOutput {
        x: state.x,
        u: state.u,
        record: rec.record,
        warnings: rec.warnings,
    })
}
