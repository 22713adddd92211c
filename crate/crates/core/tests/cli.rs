use std::path::{Path, PathBuf};

use ncs::bench::BenchSummary;
use ncs::cli::{run, RunManifest, EXIT_DATA, EXIT_OK, EXIT_USAGE};
use ncs::io;
use ncs::models::Geometry;
use ncs::ops::{default_detectors, ImageGrid};
use ncs::phantom::shepp_logan;

fn ncs(args: &[&str]) -> i32 {
    run(std::iter::once("ncs").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Workdir(tempfile::TempDir);

impl Workdir {
    fn new() -> Self {
        Self(tempfile::tempdir().unwrap())
    }
    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }
    /// A 16×16 Shepp–Logan phantom and its noiseless 20-angle sinogram.
    fn phantom_and_sino(&self) -> (PathBuf, PathBuf) {
        let img = self.path("img.f64");
        let sino = self.path("sino.f64");
        assert_eq!(ncs(&["phantom", "--size", "16", "--out", s(&img)]), EXIT_OK);
        assert_eq!(ncs(&["simulate", "--in", s(&img), "--angles", "20", "--out", s(&sino)]), EXIT_OK);
        (img, sino)
    }
}

#[test]
fn usage_errors() {
    let w = Workdir::new();
    assert_eq!(ncs(&["phantom", "--size", "16"]), EXIT_USAGE);
    assert_eq!(ncs(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(ncs(&["phantom", "--out", s(&w.path("x"))]), EXIT_USAGE);
    assert_eq!(
        ncs(&["estimate-mask", "--operator", "parallel", "--size", "8", "--samples", "0", "--out", s(&w.path("m"))]),
        EXIT_USAGE
    );
    assert_eq!(ncs(&["--help"]), EXIT_OK);
}

#[test]
fn phantom_writes_image_preview_and_manifest() {
    let w = Workdir::new();
    let out = w.path("p.f64");
    let pgm = w.path("p.pgm");
    assert_eq!(ncs(&["phantom", "--size", "64", "--out", s(&out), "--pgm", s(&pgm)]), EXIT_OK);
    assert_eq!(io::read_image(&out).unwrap(), shepp_logan(64).unwrap());
    assert_eq!(std::fs::read(&pgm).unwrap().len(), b"P5\n64 64\n255\n".len() + 64 * 64);
    let m = RunManifest::read(&RunManifest::path_for(&out)).unwrap();
    assert_eq!(m.subcommand, "phantom");
    assert_eq!(m.outputs, vec![out, pgm]);
    assert_eq!(m.parameters["size"], 64);

    let spec = w.path("spec.json");
    std::fs::write(&spec, r#"{"size": 9, "ellipses": []}"#).unwrap();
    let out = w.path("q.f64");
    assert_eq!(ncs(&["phantom", "--spec", s(&spec), "--out", s(&out)]), EXIT_OK);
    assert_eq!(io::read_image(&out).unwrap(), ImageGrid::zeros(9));
}

#[test]
fn noiseless_simulation_is_exact() {
    let w = Workdir::new();
    let (_, sino) = w.phantom_and_sino();
    let file = io::read_sinogram(&sino).unwrap();
    let g = Geometry::parallel(16, 20, default_detectors(16)).unwrap();
    let expected = g.map().forward(shepp_logan(16).unwrap().as_slice());
    assert_eq!(file.sinogram.as_slice(), expected.as_slice());
    assert_eq!(file.geometry, Some(g.spec()));
    let m = RunManifest::read(&RunManifest::path_for(&sino)).unwrap();
    assert_eq!(m.seed, Some(0));
}

#[test]
fn simulation_errors() {
    let w = Workdir::new();
    let img = w.path("neg.f64");
    io::write_image(&img, &ImageGrid::constant(16, -1.0)).unwrap();
    let out = w.path("s.f64");
    assert_eq!(ncs(&["simulate", "--in", s(&img), "--noise", "poisson:1", "--out", s(&out)]), EXIT_USAGE);
    assert_eq!(ncs(&["simulate", "--in", s(&img), "--noise", "uniform:1", "--out", s(&out)]), EXIT_USAGE);
    assert_eq!(ncs(&["simulate", "--in", s(&w.path("missing")), "--out", s(&out)]), EXIT_DATA);
    std::fs::write(&img, [0u8; 5]).unwrap();
    assert_eq!(ncs(&["simulate", "--in", s(&img), "--out", s(&out)]), EXIT_DATA);
}

#[test]
fn fan_beam_simulation() {
    let w = Workdir::new();
    let (img, _) = w.phantom_and_sino();
    let out = w.path("fan.f64");
    let args = ["simulate", "--in", s(&img), "--geometry", "fan", "--angles", "24", "--detectors", "31"];
    assert_eq!(ncs(&[&args[..], &["--out", s(&out)]].concat()), EXIT_OK);
    let file = io::read_sinogram(&out).unwrap();
    assert_eq!(file.sinogram.shape(), (24, 31));
    let g = file.geometry.unwrap().build().unwrap();
    let expected = g.map().forward(io::read_image(&img).unwrap().as_slice());
    assert_eq!(file.sinogram.as_slice(), expected.as_slice());
}

#[test]
fn zero_iterations_return_the_initial_image() {
    let w = Workdir::new();
    let (_, sino) = w.phantom_and_sino();
    for solver in ["ncs", "pdhg", "admm"] {
        let out = w.path(&format!("{solver}.f64"));
        let log = w.path(&format!("{solver}.csv"));
        let code = ncs(&["reconstruct", "--sino", s(&sino), "--solver", solver, "--iters", "0", "--out", s(&out), "--log", s(&log)]);
        assert_eq!(code, EXIT_OK, "{solver}");
        assert_eq!(io::read_image(&out).unwrap(), ImageGrid::zeros(16));
    }
}

#[test]
fn reconstruction_improves_on_the_initial_guess() {
    let w = Workdir::new();
    let (img, sino) = w.phantom_and_sino();
    let out = w.path("r.f64");
    let log = w.path("r.csv");
    let code = ncs(&[
        "reconstruct", "--sino", s(&sino), "--alpha", "0.05", "--beta", "0.1", "--gamma", "30",
        "--lambda", "0.01", "--dc", "100", "--iters", "300", "--positivity", "--record-every", "10",
        "--ref-iters", "50", "--out", s(&out), "--log", s(&log),
    ]);
    assert_eq!(code, EXIT_OK);
    let truth = io::read_image(&img).unwrap();
    let rec = io::read_image(&out).unwrap();
    let err: f64 = truth.as_slice().iter().zip(rec.as_slice()).map(|(a, b)| (a - b).powi(2)).sum();
    let base: f64 = truth.as_slice().iter().map(|a| a * a).sum();
    assert!(err < 0.25 * base, "relative error² {}", err / base);
    // The constraint is a split block, so x only approaches feasibility.
    assert!(rec.as_slice().iter().all(|&v| v >= -1e-2));

    let csv = std::fs::read_to_string(&log).unwrap();
    assert_eq!(csv.lines().count(), 1 + 30);
    let m = RunManifest::read(&RunManifest::path_for(&out)).unwrap();
    assert_eq!(m.parameters["resolved"]["alpha"], 0.05);
    assert!(m.parameters["resolved"]["reference_objective"].is_f64());
    assert_eq!(m.outputs, vec![out, log]);
}

#[test]
fn reconstruct_rejects_bad_input() {
    let w = Workdir::new();
    let (img, sino) = w.phantom_and_sino();
    let (out, log) = (w.path("o"), w.path("l"));
    let base = ["reconstruct", "--out", s(&out), "--log", s(&log)];
    assert_eq!(ncs(&[&base[..], &["--sino", s(&img)]].concat()), EXIT_DATA);
    assert_eq!(ncs(&[&base[..], &["--sino", s(&sino), "--alpha=-1"]].concat()), EXIT_USAGE);
    assert_eq!(ncs(&[&base[..], &["--sino", s(&sino), "--mask", s(&w.path("none"))]].concat()), EXIT_DATA);
}

#[test]
fn estimated_mask_feeds_reconstruction() {
    let w = Workdir::new();
    let (_, sino) = w.phantom_and_sino();
    let mask = w.path("mask.f64");
    let code = ncs(&["estimate-mask", "--operator", "parallel", "--size", "16", "--angles", "20", "--samples", "4", "--seed", "2", "--out", s(&mask)]);
    assert_eq!(code, EXIT_OK);
    let m = io::read_mask(&mask).unwrap();
    assert_eq!(m.size(), 16);
    assert!(m.values().iter().all(|v| v.re.is_finite() && v.im.is_finite()));

    let (out, log) = (w.path("r.f64"), w.path("r.csv"));
    let code = ncs(&[
        "reconstruct", "--sino", s(&sino), "--mask", s(&mask), "--alpha", "0.05", "--beta", "0.1",
        "--gamma", "30", "--iters", "20", "--out", s(&out), "--log", s(&log),
    ]);
    assert_eq!(code, EXIT_OK);
    let manifest = RunManifest::read(&RunManifest::path_for(&out)).unwrap();
    assert!(manifest.inputs.contains(&mask));
}

#[test]
fn estimate_mask_from_matrix_file() {
    let w = Workdir::new();
    let g = Geometry::fan(8, 10, default_detectors(8)).unwrap();
    let Geometry::Fan(beam) = &g else { unreachable!() };
    let coo = w.path("e.coo");
    io::write_coo(&coo, beam.matrix(), Default::default()).unwrap();
    let from_file = w.path("file.f64");
    let direct = w.path("direct.f64");
    let args = ["estimate-mask", "--samples", "3", "--seed", "5"];
    assert_eq!(ncs(&[&args[..], &["--operator", "file", "--matrix", s(&coo), "--out", s(&from_file)]].concat()), EXIT_OK);
    assert_eq!(
        ncs(&[&args[..], &["--operator", "fan", "--size", "8", "--angles", "10", "--out", s(&direct)]].concat()),
        EXIT_OK
    );
    let (a, b) = (io::read_mask(&from_file).unwrap(), io::read_mask(&direct).unwrap());
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((x - y).norm() < 1e-9 * (1.0 + y.norm()));
    }
    assert_eq!(ncs(&["estimate-mask", "--operator", "file", "--out", s(&from_file)]), EXIT_USAGE);
}

#[test]
fn bench_writes_records_and_summary() {
    let w = Workdir::new();
    let problem = w.path("problem.json");
    std::fs::write(
        &problem,
        r#"{
            "model": "ct", "size": 16,
            "geometry": {"kind": "parallel", "angles": 20},
            "noise": {"kind": "gaussian", "relative_sigma": 0.005},
            "seed": 3, "lambda": 0.1, "threshold": 1e-2,
            "solvers": {
                "ncs": {"alpha": 0.05, "beta": 0.1, "gamma": 30.0, "dc": 100.0},
                "pdhg": {"alpha": 0.05, "beta": 0.1, "gamma": 20.0},
                "admm": {"alpha": 1.0, "beta": 0.1, "n_cg": 5}
            }
        }"#,
    )
    .unwrap();
    let out = w.path("bench");
    let code = ncs(&["bench", "--problem", s(&problem), "--iters", "100", "--ref-iters", "2000", "--out", s(&out)]);
    assert_eq!(code, EXIT_OK);
    let summary: BenchSummary = serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.reference_iterations, 2000);
    assert_eq!(summary.solvers.len(), 3);
    for solver in ["ncs", "pdhg", "admm"] {
        assert!(out.join(format!("{solver}.csv")).exists());
    }
    assert!(summary.solvers.values().all(|s| s.final_rel_subopt.is_finite()));
    assert!(RunManifest::read(&out.join("manifest.json")).is_ok());

    assert_eq!(ncs(&["bench", "--problem", s(&problem), "--solvers", "fista", "--out", s(&out)]), EXIT_USAGE);
    std::fs::write(&problem, "{").unwrap();
    assert_eq!(ncs(&["bench", "--problem", s(&problem), "--out", s(&out)]), EXIT_DATA);
}
