use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::circulant::{SpectralMask, DEFAULT_PINV_REL_TOL};
use crate::error::{Error, Result};
use crate::ops::LinearMap;
use crate::prox::ProxConj;

/// One row block of the splitting: contributes `g_i(w_i·A_i x - o_i)`.
#[derive(Clone)]
pub struct Block {
    pub weight: f64,
    pub map: Arc<dyn LinearMap>,
    pub prox: Arc<dyn ProxConj>,
    pub offset: Vec<f64>,
}

impl Block {
    pub fn new(weight: f64, map: Arc<dyn LinearMap>, prox: Arc<dyn ProxConj>, offset: Vec<f64>) -> Self {
        Self {
            weight,
            map,
            prox,
            offset,
        }
    }

    /// Block with zero offset.
    pub fn centered(weight: f64, map: Arc<dyn LinearMap>, prox: Arc<dyn ProxConj>) -> Self {
        let offset = vec![0.0; map.range_dim()];
        Self::new(weight, map, prox, offset)
    }
}

/// `A = [w₁A₁; w₂A₂; …]`, `b = [o₁; o₂; …]`, `g = Σ g_i` blockwise.
#[derive(Clone)]
pub struct SplitProblem {
    blocks: Vec<Block>,
    starts: Vec<usize>,
    domain: usize,
    project_nonneg: bool,
}

impl SplitProblem {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        let domain = blocks
            .first()
            .map(|b| b.map.domain_dim())
            .ok_or_else(|| Error::invalid("blocks", "at least one block is required"))?;
        let mut starts = vec![0];
        for b in &blocks {
            if b.map.domain_dim() != domain {
                return Err(Error::SizeMismatch {
                    expected: domain,
                    actual: b.map.domain_dim(),
                    context: "block domain",
                });
            }
            if !(b.weight > 0.0 && b.weight.is_finite()) {
                return Err(Error::invalid("weight", "block weights must be positive"));
            }
            if b.offset.len() != b.map.range_dim() {
                return Err(Error::SizeMismatch {
                    expected: b.map.range_dim(),
                    actual: b.offset.len(),
                    context: "block offset",
                });
            }
            starts.push(starts.last().unwrap() + b.map.range_dim());
        }
        Ok(Self {
            blocks,
            starts,
            domain,
            project_nonneg: false,
        })
    }

    /// Report objectives at `max(x, 0)`. For problems carrying an `x ≥ 0`
    /// block the iterates are only feasible in the limit, and a data term
    /// such as the Poisson likelihood is infinite at most infeasible points.
    pub fn with_nonneg_reporting(mut self) -> Self {
        self.project_nonneg = true;
        self
    }

    pub fn reports_nonneg(&self) -> bool {
        self.project_nonneg
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn domain_dim(&self) -> usize {
        self.domain
    }

    pub fn range_dim(&self) -> usize {
        *self.starts.last().unwrap()
    }

    pub fn block_range(&self, i: usize) -> std::ops::Range<usize> {
        self.starts[i]..self.starts[i + 1]
    }

    /// `out = Ax` (weights applied).
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, b) in self.blocks.iter().enumerate() {
            let seg = &mut out[self.block_range(i)];
            b.map.forward_into(x, seg);
            if b.weight != 1.0 {
                seg.iter_mut().for_each(|v| *v *= b.weight);
            }
        }
    }

    /// `out = Aᵀu`.
    pub fn apply_adjoint(&self, u: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut tmp = vec![0.0; self.domain];
        for (i, b) in self.blocks.iter().enumerate() {
            b.map.adjoint_into(&u[self.block_range(i)], &mut tmp);
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o += b.weight * t;
            }
        }
    }

    pub fn offsets(&self) -> Vec<f64> {
        self.blocks.iter().flat_map(|b| b.offset.iter().copied()).collect()
    }

    /// `g(ax - b)` for a precomputed `ax = Ax`.
    pub fn objective_from_ax(&self, ax: &[f64]) -> f64 {
        let mut total = 0.0;
        let mut resid = Vec::new();
        for (i, b) in self.blocks.iter().enumerate() {
            resid.clear();
            resid.extend(ax[self.block_range(i)].iter().zip(&b.offset).map(|(a, o)| a - o));
            total += b.prox.objective(&resid);
        }
        total
    }

    /// The objective recorded for iterate `x` with `ax = Ax`.
    pub fn reported_objective(&self, x: &[f64], ax: &[f64]) -> f64 {
        if self.project_nonneg && x.iter().any(|&v| v < 0.0) {
            let clamped: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
            self.objective(&clamped)
        } else {
            self.objective_from_ax(ax)
        }
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.range_dim()];
        self.apply(x, &mut ax);
        self.objective_from_ax(&ax)
    }

    /// Content hash: dimensions, weights, offsets, prox descriptors and the
    /// response of `A` to a fixed probe.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.domain as u64).to_le_bytes());
        h.update([self.project_nonneg as u8]);
        let probe: Vec<f64> = (0..self.domain)
            .map(|i| ((i as f64 + 1.0) * 0.618_033_988_749_895).fract() - 0.5)
            .collect();
        let mut ax = vec![0.0; self.range_dim()];
        self.apply(&probe, &mut ax);
        for b in &self.blocks {
            h.update((b.map.range_dim() as u64).to_le_bytes());
            h.update(b.weight.to_le_bytes());
            h.update(b.prox.descriptor().as_bytes());
            for o in &b.offset {
                h.update(o.to_le_bytes());
            }
        }
        for v in &ax {
            h.update(v.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Solver parameters.
///
/// `alpha` is the dual step. The metric is `M = gamma·I + alpha·C` when a
/// circulant approximation `C` (its mask) is given, else `gamma·I` (PDHG).
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub mask: Option<SpectralMask>,
    pub max_iters: usize,
    pub record_every: usize,
    pub pinv_rel_tol: f64,
    /// Objective used for the `rel_subopt` column; NaN when absent.
    pub reference_objective: Option<f64>,
    /// Evaluate the D-seminorm of each recorded step.
    pub record_seminorm: bool,
    /// Power iterations for the step-size/dominance warning (0 disables).
    pub check_iters: usize,
    /// Stop at the first recorded iteration with `rel_subopt` at or below
    /// this value (needs a reference objective).
    pub stop_below: Option<f64>,
}

impl SolverConfig {
    pub fn new(alpha: f64, gamma: f64, mask: Option<SpectralMask>) -> Self {
        Self {
            alpha,
            gamma,
            mask,
            max_iters: 100,
            record_every: 1,
            pinv_rel_tol: DEFAULT_PINV_REL_TOL,
            reference_objective: None,
            record_seminorm: true,
            check_iters: 50,
            stop_below: None,
        }
    }

    pub fn with_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every.max(1);
        self
    }

    pub fn with_reference(mut self, objective: f64) -> Self {
        self.reference_objective = Some(objective);
        self
    }

    pub fn with_stop_below(mut self, threshold: f64) -> Self {
        self.stop_below = Some(threshold);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha", "must be positive"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("gamma", "must be nonnegative"));
        }
        if self.mask.is_none() && self.gamma <= 0.0 {
            return Err(Error::invalid("gamma", "must be positive when no mask is given"));
        }
        Ok(())
    }
}

/// Primal/dual iterates with the cached product `Ax`.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub ax: Vec<f64>,
    pub iteration: usize,
}

impl SolverState {
    /// `x⁰ = 0`, `u⁰ = 0`.
    pub fn zeros(problem: &SplitProblem) -> Self {
        Self {
            x: vec![0.0; problem.domain_dim()],
            u: vec![0.0; problem.range_dim()],
            ax: vec![0.0; problem.range_dim()],
            iteration: 0,
        }
    }

    pub fn from_parts(problem: &SplitProblem, x: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        crate::error::check_len(problem.domain_dim(), x.len(), "state x")?;
        crate::error::check_len(problem.range_dim(), u.len(), "state u")?;
        let mut ax = vec![0.0; problem.range_dim()];
        problem.apply(&x, &mut ax);
        Ok(Self {
            x,
            u,
            ax,
            iteration: 0,
        })
    }
}

impl LinearMap for SplitProblem {
    fn domain_dim(&self) -> usize {
        self.domain
    }

    fn range_dim(&self) -> usize {
        SplitProblem::range_dim(self)
    }

    fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        self.apply(x, out)
    }

    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        self.apply_adjoint(y, out)
    }
}
