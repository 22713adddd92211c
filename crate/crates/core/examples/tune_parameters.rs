//! Grid search over the power-of-3 parameter grid for one solver on the
//! standard parallel-beam CT problem. Prints, for every setting, the
//! number of record-axis iterations needed to reach a relative
//! suboptimality of 1e-4.
//!
//! cargo run --release --example tune_parameters -- [ncs|pdhg|admm] [SIZE] [MAX_ITERS]

use ncs::bench::{
    default_settings, run_solver, GeometryKind, Model, Scenario, ScenarioSpec, SolverKind, SolverSettings,
    DEFAULT_N_CG,
};
use ncs::solvers::compute_reference;

const GRID: [f64; 7] = [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0];

fn main() -> ncs::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let solver: SolverKind = args.first().map_or("ncs", String::as_str).parse()?;
    let size: usize = args.get(1).map_or(32, |s| s.parse().expect("SIZE"));
    let max_iters: usize = args.get(2).map_or(2000, |s| s.parse().expect("MAX_ITERS"));

    let scenario = Scenario::build(&ScenarioSpec::standard_ct(size))?;
    let ref_settings = default_settings(Model::Ct, GeometryKind::Parallel, SolverKind::Ncs);
    let (problem, config) = scenario.setup(SolverKind::Ncs, &ref_settings)?;
    let reference = compute_reference(&problem, &config, 25 * max_iters)?;
    println!("reference objective {:.12e}", reference.objective);

    let mut candidates = Vec::new();
    for &alpha in &GRID {
        for &beta in &GRID {
            match solver {
                SolverKind::Ncs => {
                    for gamma in GRID.map(|g| 10.0 * g) {
                        candidates.push(SolverSettings::ncs(alpha, beta, gamma, 3000.0));
                    }
                }
                SolverKind::Pdhg => {
                    for gamma in GRID.map(|g| 100.0 * g) {
                        candidates.push(SolverSettings::pdhg(alpha, beta, gamma));
                    }
                }
                SolverKind::Admm => candidates.push(SolverSettings::admm(alpha, beta, DEFAULT_N_CG)),
            }
        }
    }

    let mut best: Option<(usize, SolverSettings)> = None;
    for settings in candidates {
        let (problem, mut config) = scenario.setup(solver, &settings)?;
        config.record_seminorm = false;
        config.check_iters = 0;
        let config = config.with_reference(reference.objective).with_stop_below(1e-4);
        let hit = match run_solver(solver, &problem, &config, &settings, max_iters) {
            Ok(out) => out.record.iterations_to(1e-4),
            Err(_) => None,
        };
        let g = settings.gamma.map_or(String::new(), |g| format!(" γ={g:<6}"));
        println!(
            "α={:<5} β={:<5}{g} → {}",
            settings.alpha,
            settings.beta,
            hit.map_or("-".into(), |k| k.to_string())
        );
        if let Some(k) = hit {
            if best.is_none_or(|(b, _)| k < b) {
                best = Some((k, settings));
            }
        }
    }
    match best {
        Some((k, s)) => println!("best: {s:?} at {k} iterations"),
        None => println!("no setting reached 1e-4 within {max_iters} iterations"),
    }
    Ok(())
}
