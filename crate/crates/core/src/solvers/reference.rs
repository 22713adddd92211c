use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::iterate::ncs_step;
use super::metric::Metric;
use super::problem::{SolverConfig, SolverState, SplitProblem};
use crate::error::{Error, Result};

/// High-accuracy solution used to measure suboptimality.
#[derive(Clone, Debug)]
pub struct Reference {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

/// Relative objective change between the last two iterations above which
/// the reference is flagged as unconverged.
const STALL_TOL: f64 = 1e-12;

/// Run `n_iters` NCS steps from zero with the metric of `config`.
pub fn compute_reference(problem: &SplitProblem, config: &SolverConfig, n_iters: usize) -> Result<Reference> {
    let metric = Metric::from_config(config, problem.domain_dim())?;
    let mut state = SolverState::zeros(problem);
    let mut previous = problem.reported_objective(&state.x, &state.ax);
    for k in 0..n_iters {
        ncs_step(&mut state, problem, &metric, config.alpha)?;
        if k + 2 == n_iters {
            previous = problem.reported_objective(&state.x, &state.ax);
        }
    }
    let objective = problem.reported_objective(&state.x, &state.ax);
    let mut warnings = Vec::new();
    let change = (objective - previous).abs() / objective.abs().max(1.0);
    if !(change <= STALL_TOL) {
        let msg = format!(
            "reference objective still changing after {n_iters} iterations (relative change {change:.3e})"
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(Reference {
        x: state.x,
        u: state.u,
        objective,
        iterations: n_iters,
        warnings,
    })
}

#[derive(Serialize, Deserialize)]
struct CacheHeader {
    key: String,
    objective: f64,
    iterations: usize,
    domain_dim: usize,
    range_dim: usize,
    warnings: Vec<String>,
}

/// Cache key: problem fingerprint, metric parameters and iteration count.
pub fn reference_key(problem: &SplitProblem, config: &SolverConfig, n_iters: usize) -> String {
    let mut h = Sha256::new();
    h.update(problem.fingerprint().as_bytes());
    h.update(config.alpha.to_le_bytes());
    h.update(config.gamma.to_le_bytes());
    h.update(config.pinv_rel_tol.to_le_bytes());
    if let Some(mask) = &config.mask {
        h.update((mask.size() as u64).to_le_bytes());
        for c in mask.values() {
            h.update(c.re.to_le_bytes());
            h.update(c.im.to_le_bytes());
        }
    }
    h.update((n_iters as u64).to_le_bytes());
    hex::encode(h.finalize())
}

fn write_f64s(path: &Path, v: &[f64]) -> Result<()> {
    let bytes: Vec<u8> = v.iter().flat_map(|x| x.to_le_bytes()).collect();
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_f64s(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() != 8 * expected {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected: 8 * expected as u64,
            found: bytes.len() as u64,
        });
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn cache_paths(dir: &Path, key: &str) -> (PathBuf, PathBuf, PathBuf) {
    let stem = format!("reference-{}", &key[..16]);
    (
        dir.join(format!("{stem}.json")),
        dir.join(format!("{stem}.x.f64")),
        dir.join(format!("{stem}.u.f64")),
    )
}

fn load_cached(dir: &Path, key: &str, problem: &SplitProblem) -> Option<Reference> {
    let (header_path, x_path, u_path) = cache_paths(dir, key);
    let text = std::fs::read_to_string(&header_path).ok()?;
    let header: CacheHeader = serde_json::from_str(&text).ok()?;
    if header.key != key || header.domain_dim != problem.domain_dim() || header.range_dim != problem.range_dim() {
        return None;
    }
    Some(Reference {
        x: read_f64s(&x_path, header.domain_dim).ok()?,
        u: read_f64s(&u_path, header.range_dim).ok()?,
        objective: header.objective,
        iterations: header.iterations,
        warnings: header.warnings,
    })
}

/// [`compute_reference`] persisted under `dir`, keyed by a hash of the
/// problem and settings. A missing or unreadable entry is recomputed.
pub fn compute_reference_cached(
    problem: &SplitProblem,
    config: &SolverConfig,
    n_iters: usize,
    dir: &Path,
) -> Result<Reference> {
    let key = reference_key(problem, config, n_iters);
    if let Some(r) = load_cached(dir, &key, problem) {
        log::info!("reusing cached reference {}", &key[..16]);
        return Ok(r);
    }
    let r = compute_reference(problem, config, n_iters)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (header_path, x_path, u_path) = cache_paths(dir, &key);
    write_f64s(&x_path, &r.x)?;
    write_f64s(&u_path, &r.u)?;
    let header = CacheHeader {
        key,
        objective: r.objective,
        iterations: r.iterations,
        domain_dim: problem.domain_dim(),
        range_dim: problem.range_dim(),
        warnings: r.warnings.clone(),
    };
    let text = serde_json::to_string_pretty(&header).expect("header serializes");
    std::fs::write(&header_path, text).map_err(|e| Error::io(&header_path, e))?;
    Ok(r)
}
