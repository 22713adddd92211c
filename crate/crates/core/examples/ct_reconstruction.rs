//! Reconstruct the 64×64 Shepp–Logan phantom from 60 noisy parallel-beam
//! projections with NCS and report the error against the ground truth.
//!
//! cargo run --release --example ct_reconstruction -- [ITERS]

use ncs::bench::{default_settings, GeometryKind, Model, Scenario, ScenarioSpec, SolverKind};
use ncs::solvers::ncs_solve;

fn main() -> ncs::Result<()> {
    let iters: usize = std::env::args().nth(1).map_or(500, |s| s.parse().expect("ITERS"));
    let scenario = Scenario::build(&ScenarioSpec::standard_ct(64))?;
    let settings = default_settings(Model::Ct, GeometryKind::Parallel, SolverKind::Ncs);
    let (problem, config) = scenario.setup(SolverKind::Ncs, &settings)?;
    let out = ncs_solve(&problem, &config.with_iters(iters).with_record_every(iters / 10))?;

    for e in &out.record.entries {
        println!("iter {:>5}  objective {:.8e}  step seminorm {:.3e}", e.iter, e.objective, e.seminorm_step);
    }
    let truth = scenario.truth.as_slice();
    let err: f64 = out.x.iter().zip(truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = truth.iter().map(|v| v * v).sum::<f64>().sqrt();
    println!("relative error vs phantom: {:.4}", err / norm);
    Ok(())
}
