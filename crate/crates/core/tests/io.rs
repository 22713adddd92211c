mod common;

use common::gaussian;
use ncs::io::*;
use ncs::models::{Geometry, GeometrySpec};
use ncs::ops::{default_detectors, CsrMatrix, ImageGrid, Sinogram};
use ncs::phantom::*;
use ncs::rng::Stream;
use ncs::simulate::*;
use ncs::Error;
use sha2::{Digest, Sha256};

fn hash(img: &ImageGrid) -> String {
    let mut h = Sha256::new();
    for v in img.as_slice() {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Independent rasterizer: the classic quadratic-form test
/// `((x-x₀)cosθ + (y-y₀)sinθ)²/a² + ((y-y₀)cosθ - (x-x₀)sinθ)²/b² ≤ 1`.
fn rasterize(n: usize, table: &[(f64, f64, f64, f64, f64, f64)]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let x = -1.0 + (2.0 * j as f64 + 1.0) / n as f64;
            let y = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            for &(v, a, b, x0, y0, deg) in table {
                let t = deg * std::f64::consts::PI / 180.0;
                let (dx, dy) = (x - x0, y - y0);
                let p = dx * t.cos() + dy * t.sin();
                let q = dy * t.cos() - dx * t.sin();
                if (p / a).powi(2) + (q / b).powi(2) <= 1.0 {
                    out[i * n + j] += v;
                }
            }
        }
    }
    out
}

#[test]
fn shepp_logan_matches_reference_rasterization() {
    let table = [
        (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
        (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
        (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
        (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
        (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
        (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
        (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
        (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
        (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
        (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
    ];
    let img = shepp_logan(64).unwrap();
    let oracle = rasterize(64, &table);
    for (a, b) in img.as_slice().iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    let (lo, hi) = img.min_max();
    assert!(lo >= 0.0 && hi <= 2.0, "range [{lo}, {hi}]");
    assert_eq!(hash(&img), hash(&shepp_logan(64).unwrap()));
}

#[test]
fn full_disk_is_an_indicator() {
    let spec = PhantomSpec {
        size: 32,
        ellipses: vec![Ellipse {
            center: [0.0, 0.0],
            axes: [0.5, 0.5],
            angle_deg: 0.0,
            intensity: 1.0,
        }],
    };
    let img = make_phantom(&spec).unwrap();
    for i in 0..32 {
        for j in 0..32 {
            let x = (2 * j + 1) as f64 / 32.0 - 1.0;
            let y = 1.0 - (2 * i + 1) as f64 / 32.0;
            let want = if x * x + y * y <= 0.25 { 1.0 } else { 0.0 };
            assert_eq!(img.get(i, j), want);
        }
    }
    assert!(make_phantom(&PhantomSpec { size: 16, ellipses: vec![] })
        .unwrap()
        .as_slice()
        .iter()
        .all(|&v| v == 0.0));
}

#[test]
fn phantom_spec_parsing_and_validation() {
    let text = r#"{"size": 12, "ellipses": [{"center": [0.1, 0.0], "axes": [0.3, 0.2], "angle_deg": 30.0, "intensity": 2.0}]}"#;
    let spec = PhantomSpec::from_json(text, None).unwrap();
    assert_eq!(spec.size, 12);
    assert_eq!(PhantomSpec::from_json(text, Some(20)).unwrap().size, 20);
    assert!(PhantomSpec::from_json("{\"ellipses\": []}", None).is_err());
    assert!(make_phantom(&PhantomSpec { size: 4, ellipses: vec![] }).is_err());
    let bad = r#"{"size": 12, "ellipses": [{"center": [0, 0], "axes": [0, 1], "angle_deg": 0, "intensity": 1}]}"#;
    assert!(make_phantom(&PhantomSpec::from_json(bad, None).unwrap()).is_err());
}

fn geometry() -> Geometry {
    Geometry::parallel(32, 40, default_detectors(32)).unwrap()
}

#[test]
fn noiseless_ct_is_the_projection() {
    let g = geometry();
    let x = shepp_logan(32).unwrap();
    let b = simulate_ct(&x, &g, 0.0, 9).unwrap();
    assert_eq!(b.as_slice(), g.map().forward(x.as_slice()).as_slice());
}

#[test]
fn gaussian_noise_statistics() {
    let g = Geometry::parallel(64, 120, default_detectors(64)).unwrap();
    let x = shepp_logan(64).unwrap();
    let clean = g.map().forward(x.as_slice());
    let sigma = 0.3;
    let b = simulate_ct(&x, &g, sigma, 5).unwrap();
    assert!(b.as_slice().len() >= 10_000);
    let r: Vec<f64> = b.as_slice().iter().zip(&clean).map(|(a, c)| a - c).collect();
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    let std = (r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r.len() - 1) as f64).sqrt();
    assert!((std - sigma).abs() < 0.05 * sigma, "std {std}");
    assert_eq!(b, simulate_ct(&x, &g, sigma, 5).unwrap());
    assert_ne!(b, simulate_ct(&x, &g, sigma, 6).unwrap());
}

#[test]
fn poisson_counts_statistics() {
    let g = Geometry::parallel(16, 8, default_detectors(16)).unwrap();
    let x = shepp_logan(16).unwrap();
    let scale = 0.7;
    let means: Vec<f64> = g.map().forward(x.as_slice()).iter().map(|v| scale * v).collect();
    let reps = 400;
    let mut sums = vec![0.0; means.len()];
    for seed in 0..reps {
        let b = simulate_pet(&x, &g, scale, seed).unwrap();
        for (s, v) in sums.iter_mut().zip(b.as_slice()) {
            assert!(v.fract() == 0.0 && *v >= 0.0);
            *s += v;
        }
    }
    for (s, &m) in sums.iter().zip(&means) {
        let avg = s / reps as f64;
        if m == 0.0 {
            assert_eq!(avg, 0.0);
        } else {
            // Four standard errors keeps the false-alarm rate over all
            // bins negligible.
            assert!((avg - m).abs() <= 4.0 * (m / reps as f64).sqrt() + 1e-12, "{avg} vs {m}");
        }
    }
    let zero = simulate_pet(&ImageGrid::zeros(16), &g, scale, 1).unwrap();
    assert!(zero.as_slice().iter().all(|&v| v == 0.0));
    let mut neg = x.clone();
    neg.set(3, 3, -0.1);
    assert!(simulate_pet(&neg, &g, scale, 1).is_err());
    assert!(simulate_pet(&x, &g, 0.0, 1).is_err());
}

#[test]
fn noise_spec_parsing() {
    assert!(matches!(NoiseKind::parse("gaussian:0.5").unwrap(), NoiseKind::Gaussian { sigma } if sigma == 0.5));
    assert!(matches!(NoiseKind::parse("poisson:2").unwrap(), NoiseKind::Poisson { exposure_scale } if exposure_scale == 2.0));
    assert!(NoiseKind::parse("gaussian:-1").is_err());
    assert!(NoiseKind::parse("poisson:0").is_err());
    assert!(NoiseKind::parse("laplace:1").is_err());
}

#[test]
fn raw_round_trips_are_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = Stream::new(3);
    let img = ImageGrid::from_vec(10, gaussian(&mut s, 100)).unwrap();
    let p = dir.path().join("img.f64");
    write_image(&p, &img).unwrap();
    assert_eq!(read_image(&p).unwrap(), img);

    let sino = Sinogram::from_vec(4, 7, gaussian(&mut s, 28)).unwrap();
    let file = SinogramFile {
        sinogram: sino,
        geometry: Some(GeometrySpec::Parallel { n: 5, n_angles: 4, n_detectors: 7 }),
        noise: Some(NoiseSpec { kind: NoiseKind::Gaussian { sigma: 0.1 }, seed: 4 }),
    };
    let p = dir.path().join("sino.f64");
    write_sinogram(&p, &file).unwrap();
    assert_eq!(read_sinogram(&p).unwrap(), file);
}

#[test]
fn format_errors_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("img.f64");
    write_image(&p, &ImageGrid::constant(4, 1.0)).unwrap();
    let bytes = std::fs::read(&p).unwrap();

    std::fs::write(&p, &bytes[..bytes.len() - 8]).unwrap();
    assert!(matches!(read_image(&p), Err(Error::Truncated { .. })));

    std::fs::write(&p, [&bytes[..], &[0u8; 8]].concat()).unwrap();
    assert!(matches!(read_image(&p), Err(Error::ShapeMismatch { .. })));

    std::fs::write(&p, &bytes).unwrap();
    std::fs::write(sidecar_path(&p), "{not json").unwrap();
    assert!(matches!(read_image(&p), Err(Error::MalformedHeader { .. })));

    write_sinogram(&p, &SinogramFile { sinogram: Sinogram::zeros(2, 3), geometry: None, noise: None }).unwrap();
    assert!(matches!(read_image(&p), Err(Error::ShapeMismatch { .. })));

    assert!(matches!(read_image(&dir.path().join("missing.f64")), Err(Error::Io { .. })));
}

#[test]
fn masks_and_sparse_matrices_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = Stream::new(8);
    let mask = common::random_mask(&mut s, 6);
    let p = dir.path().join("mask.f64");
    write_mask(&p, &mask, Default::default()).unwrap();
    assert_eq!(read_mask(&p).unwrap(), mask);

    let m = CsrMatrix::from_triplets(3, 5, &[(0, 1, 2.5), (2, 4, -1.0), (1, 0, 1e-300)]);
    let p = dir.path().join("m.coo");
    write_coo(&p, &m, Default::default()).unwrap();
    let (header, back) = read_coo(&p).unwrap();
    assert_eq!(header.shape, vec![3, 5]);
    assert_eq!(back.triplets().collect::<Vec<_>>(), m.triplets().collect::<Vec<_>>());
}

#[test]
fn pgm_windowing() {
    assert!(to_gray(&ImageGrid::constant(5, -3.0)).iter().all(|&g| g == 128));
    let ramp = ImageGrid::from_fn(2, |i, j| (2 * i + j) as f64);
    assert_eq!(to_gray(&ramp), vec![0, 85, 170, 255]);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.pgm");
    write_pgm(&p, &ramp).unwrap();
    assert_eq!(std::fs::read(&p).unwrap(), [b"P5\n2 2\n255\n".as_slice(), &[0, 85, 170, 255]].concat());
}
