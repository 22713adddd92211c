//! NCS, PDHG and ADMM-CG on the same problem against a shared reference,
//! written as CSV files plus a JSON summary.
//!
//! cargo run --release --example benchmark -- [SIZE] [ITERS] [OUT_DIR]

use std::path::PathBuf;

use ncs::bench::{run_bench, BenchSpec, ScenarioSpec, SolverKind};

fn main() -> ncs::Result<()> {
    let mut args = std::env::args().skip(1);
    let size: usize = args.next().map_or(32, |s| s.parse().expect("SIZE"));
    let iters: usize = args.next().map_or(2000, |s| s.parse().expect("ITERS"));
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ncs-benchmark"));
    std::fs::create_dir_all(&dir).expect("output directory");

    let spec = BenchSpec::new(ScenarioSpec::standard_ct(size));
    let report = run_bench(&spec, &SolverKind::ALL, iters, 25 * iters, Some(&dir.join("reference")))?;
    for (solver, record) in &report.records {
        record.write_csv(&dir.join(format!("{solver}.csv")))?;
        let s = &report.summary.solvers[solver];
        println!(
            "{solver:>5}: iterations to {:e}: {:>6}   final rel. subopt {:.2e}",
            spec.threshold,
            s.iterations_to_threshold.map_or("-".into(), |k| k.to_string()),
            s.final_rel_subopt
        );
    }
    let summary = serde_json::to_string_pretty(&report.summary).expect("summary serializes");
    std::fs::write(dir.join("summary.json"), summary).expect("write summary");
    println!("CSV files and summary.json in {}", dir.display());
    Ok(())
}
