use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde_json::{json, Map};

use super::manifest::RunManifest;
use super::{
    BenchArgs, Command, EstimateMaskArgs, GeometryArg, ModelArg, OperatorArg, PhantomArgs, ReconstructArgs,
    SimulateArgs, SolverArg,
};
use crate::bench::{default_lambda, default_settings, run_bench, BenchSpec, GeometryKind, Model, SolverKind};
use crate::circulant::empirical_mask;
use crate::error::{Error, Result};
use crate::io::{self, SinogramFile};
use crate::models::{
    auto_data_mask, ct_tv_problem, pet_tv_problem, symmetrize_mask, tv_mask, Geometry, GeometrySpec, TvParams,
};
use crate::ops::{default_detectors, default_fan_angle, FanBeam, ImageGrid, LinearMap, NormalMap};
use crate::phantom::{make_phantom, PhantomSpec};
use crate::simulate::{simulate, NoiseKind, NoiseSpec};
use crate::solvers::{
    admm_cg_solve, compute_reference, ncs_solve, pdhg_solve, SolveOutput, SolverConfig,
};

pub(super) fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Phantom(a) => phantom(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Bench(a) => bench(a),
        Command::EstimateMask(a) => estimate_mask(a),
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn finish(mut manifest: RunManifest, start: Instant, primary_output: &Path) -> Result<()> {
    manifest.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    manifest.write(&RunManifest::path_for(primary_output))
}

fn phantom(args: &PhantomArgs) -> Result<()> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("phantom", args);
    let spec = match &args.spec {
        Some(path) => {
            manifest.inputs.push(path.clone());
            PhantomSpec::from_json(&read_text(path)?, args.size)?
        }
        None => {
            let size = args
                .size
                .ok_or_else(|| Error::invalid("size", "--size is required without --spec"))?;
            PhantomSpec::shepp_logan(size)
        }
    };
    let img = make_phantom(&spec)?;
    io::write_image(&args.out, &img)?;
    manifest.outputs.push(args.out.clone());
    if let Some(pgm) = &args.pgm {
        io::write_pgm(pgm, &img)?;
        manifest.outputs.push(pgm.clone());
    }
    finish(manifest, start, &args.out)
}

fn simulate_cmd(args: &SimulateArgs) -> Result<()> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("simulate", args);
    manifest.seed = Some(args.seed);
    manifest.inputs.push(args.input.clone());
    let kind = NoiseKind::parse(&args.noise)?;
    let img = io::read_image(&args.input)?;
    let n = img.size();
    let detectors = args.detectors.unwrap_or_else(|| default_detectors(n));
    let geometry = match args.geometry {
        GeometryArg::Parallel => Geometry::parallel(n, args.angles, detectors)?,
        GeometryArg::Fan => {
            let radius = args.source_radius.unwrap_or(n as f64);
            let fan = args.fan_angle.unwrap_or_else(|| default_fan_angle(n, radius));
            Geometry::Fan(Arc::new(FanBeam::new(n, args.angles, detectors, radius, fan)?))
        }
    };
    let noise = NoiseSpec { kind, seed: args.seed };
    let sinogram = simulate(&img, &geometry, &noise)?;
    io::write_sinogram(
        &args.out,
        &SinogramFile {
            sinogram,
            geometry: Some(geometry.spec()),
            noise: Some(noise),
        },
    )?;
    manifest.outputs.push(args.out.clone());
    finish(manifest, start, &args.out)
}

fn solver_kind(s: SolverArg) -> SolverKind {
    match s {
        SolverArg::Ncs => SolverKind::Ncs,
        SolverArg::Pdhg => SolverKind::Pdhg,
        SolverArg::Admm => SolverKind::Admm,
    }
}

fn reconstruct(args: &ReconstructArgs) -> Result<()> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("reconstruct", args);
    manifest.seed = Some(args.seed);
    manifest.inputs.push(args.sino.clone());
    let file = io::read_sinogram(&args.sino)?;
    let spec = file.geometry.ok_or_else(|| Error::MalformedHeader {
        path: io::sidecar_path(&args.sino),
        reason: "no `geometry` entry; cannot rebuild the forward operator".into(),
    })?;
    let geometry = spec.build()?;
    if geometry.shape() != file.sinogram.shape() {
        return Err(Error::ShapeMismatch {
            path: args.sino.clone(),
            reason: format!("geometry expects {:?}, data is {:?}", geometry.shape(), file.sinogram.shape()),
        });
    }
    let model = match args.model {
        ModelArg::Ct => Model::Ct,
        ModelArg::Pet => Model::Pet,
    };
    let kind = match spec {
        GeometrySpec::Parallel { .. } => GeometryKind::Parallel,
        GeometrySpec::Fan { .. } => GeometryKind::Fan,
    };
    let solver = solver_kind(args.solver);
    let exposure = match (model, args.exposure, file.noise.map(|n| n.kind)) {
        (Model::Ct, _, _) => 1.0,
        (Model::Pet, Some(e), _) => e,
        (Model::Pet, None, Some(NoiseKind::Poisson { exposure_scale })) => exposure_scale,
        (Model::Pet, None, _) => 1.0,
    };
    let defaults = default_settings(model, kind, solver).for_data_weight(exposure);
    let alpha = args.alpha.unwrap_or(defaults.alpha);
    let beta = args.beta.unwrap_or(defaults.beta);
    let lambda = args.lambda.unwrap_or_else(|| default_lambda(model, kind));
    let params = TvParams::new(alpha, beta, lambda)
        .with_data_weight(exposure)
        .with_positivity(args.positivity)
        .with_positivity_weight(args.positivity_weight);
    let data = file.sinogram.into_vec();
    let problem = match model {
        Model::Ct => ct_tv_problem(geometry.map(), data.clone(), &params)?,
        Model::Pet => pet_tv_problem(geometry.map(), data.clone(), &params)?,
    };

    let gamma = args.gamma.or(defaults.gamma);
    let dc = args.dc.or(defaults.dc);
    let mut config = match solver {
        SolverKind::Ncs => {
            let data_mask = if args.mask == "auto" {
                let dc = dc.ok_or_else(|| Error::invalid("dc", "required for --mask auto"))?;
                auto_data_mask(&geometry, dc, args.samples, args.seed)?
            } else {
                let path = Path::new(&args.mask);
                manifest.inputs.push(path.to_path_buf());
                symmetrize_mask(&io::read_mask(path)?)
            };
            let gamma = gamma.ok_or_else(|| Error::invalid("gamma", "required for NCS"))?;
            SolverConfig::new(alpha, gamma, Some(tv_mask(&data_mask, &params)?))
        }
        SolverKind::Pdhg => {
            let gamma = gamma.ok_or_else(|| Error::invalid("gamma", "required for PDHG"))?;
            SolverConfig::new(alpha, gamma, None)
        }
        SolverKind::Admm => SolverConfig::new(alpha, 0.0, None),
    };
    config = config.with_iters(args.iters).with_record_every(args.record_every);

    let mut resolved = Map::new();
    resolved.insert("alpha".into(), json!(alpha));
    resolved.insert("beta".into(), json!(beta));
    resolved.insert("gamma".into(), json!(gamma));
    resolved.insert("lambda".into(), json!(lambda));
    resolved.insert("dc".into(), json!(dc));
    resolved.insert("exposure".into(), json!(exposure));
    if let Some(ref_iters) = args.ref_iters {
        // An NCS run is its own reference; other solvers use the default NCS settings.
        let reference = if solver == SolverKind::Ncs {
            compute_reference(&problem, &config, ref_iters)?
        } else {
            let ncs = default_settings(model, kind, SolverKind::Ncs).for_data_weight(exposure);
            let ref_params = TvParams { alpha: ncs.alpha, beta: ncs.beta, ..params };
            let ref_problem = match model {
                Model::Ct => ct_tv_problem(geometry.map(), data, &ref_params)?,
                Model::Pet => pet_tv_problem(geometry.map(), data, &ref_params)?,
            };
            let data_mask = auto_data_mask(&geometry, ncs.dc.unwrap_or(0.0), args.samples, args.seed)?;
            let ref_config =
                SolverConfig::new(ncs.alpha, ncs.gamma.unwrap_or(1.0), Some(tv_mask(&data_mask, &ref_params)?));
            compute_reference(&ref_problem, &ref_config, ref_iters)?
        };
        manifest.warnings.extend(reference.warnings);
        resolved.insert("reference_objective".into(), json!(reference.objective));
        config = config.with_reference(reference.objective);
    }

    let out: SolveOutput = match solver {
        SolverKind::Ncs => ncs_solve(&problem, &config)?,
        SolverKind::Pdhg => pdhg_solve(&problem, &config)?,
        SolverKind::Admm => admm_cg_solve(&problem, &config, args.n_cg.or(defaults.n_cg).unwrap_or(10))?,
    };
    manifest.warnings.extend(out.warnings);
    if let Some(last) = out.record.last() {
        println!("{solver}: {} iterations, objective {:.12e}", last.iter, last.objective);
    }
    let img = ImageGrid::from_vec(geometry.image_size(), out.x)?;
    io::write_image(&args.out, &img)?;
    out.record.write_csv(&args.log)?;
    manifest.outputs.extend([args.out.clone(), args.log.clone()]);
    if let Some(pgm) = &args.pgm {
        io::write_pgm(pgm, &img)?;
        manifest.outputs.push(pgm.clone());
    }
    if let serde_json::Value::Object(map) = &mut manifest.parameters {
        map.insert("resolved".into(), resolved.into());
    }
    finish(manifest, start, &args.out)
}

fn bench(args: &BenchArgs) -> Result<()> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("bench", args);
    manifest.inputs.push(args.problem.clone());
    let spec: BenchSpec = serde_json::from_str(&read_text(&args.problem)?).map_err(|e| Error::MalformedHeader {
        path: args.problem.clone(),
        reason: e.to_string(),
    })?;
    manifest.seed = Some(spec.scenario.seed);
    let solvers = args
        .solvers
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<SolverKind>>>()?;
    if solvers.is_empty() {
        return Err(Error::invalid("solvers", "no solver requested"));
    }
    let ref_iters = args.ref_iters.unwrap_or(50 * args.iters);
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let cache = args.out.join("reference");
    let report = run_bench(&spec, &solvers, args.iters, ref_iters, Some(&cache))?;
    for (solver, record) in &report.records {
        let path = args.out.join(format!("{solver}.csv"));
        record.write_csv(&path)?;
        manifest.outputs.push(path);
    }
    let summary_path = args.out.join("summary.json");
    let text = serde_json::to_string_pretty(&report.summary).expect("summary serializes");
    std::fs::write(&summary_path, text).map_err(|e| Error::io(&summary_path, e))?;
    manifest.outputs.push(summary_path);
    manifest.warnings.extend(report.summary.reference_warnings.iter().cloned());
    for (solver, s) in &report.summary.solvers {
        println!(
            "{solver}: iterations to {:e} = {}",
            report.summary.threshold,
            s.iterations_to_threshold.map_or("not reached".into(), |k| k.to_string())
        );
        manifest.warnings.extend(s.warnings.iter().map(|w| format!("{solver}: {w}")));
    }
    manifest.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    manifest.write(&args.out.join("manifest.json"))
}

fn estimate_mask(args: &EstimateMaskArgs) -> Result<()> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("estimate-mask", args);
    manifest.seed = Some(args.seed);
    let size = || args.size.ok_or_else(|| Error::invalid("size", "--size is required for this operator"));
    let op: Arc<dyn LinearMap> = match args.operator {
        OperatorArg::Parallel => {
            let n = size()?;
            let g = Geometry::parallel(n, args.angles, args.detectors.unwrap_or_else(|| default_detectors(n)))?;
            Arc::new(NormalMap::new(g.map()))
        }
        OperatorArg::Fan => {
            let n = size()?;
            let g = Geometry::fan(n, args.angles, args.detectors.unwrap_or_else(|| default_detectors(n)))?;
            Arc::new(NormalMap::new(g.map()))
        }
        OperatorArg::File => {
            let path = args
                .matrix
                .as_ref()
                .ok_or_else(|| Error::invalid("matrix", "--matrix is required with --operator file"))?;
            manifest.inputs.push(path.clone());
            let (_, m) = io::read_coo(path)?;
            if args.normal {
                Arc::new(m)
            } else {
                Arc::new(NormalMap::new(m))
            }
        }
    };
    let est = empirical_mask(op.as_ref(), args.samples, args.seed)?;
    let mut extra = Map::new();
    extra.insert("samples".into(), json!(args.samples));
    extra.insert("seed".into(), json!(args.seed));
    extra.insert("skipped_bins".into(), json!(est.skipped_bins));
    io::write_mask(&args.out, &est.mask, extra)?;
    if !est.skipped_bins.is_empty() {
        manifest
            .warnings
            .push(format!("{} frequency bins never resolved; set to 0", est.skipped_bins.len()));
    }
    manifest.outputs.push(args.out.clone());
    finish(manifest, start, &args.out)
}
