mod common;

use std::sync::Arc;

use common::{gaussian, max_abs_diff, worst_adjoint_gap};
use nalgebra::DMatrix;
use ncs::circulant::{empirical_mask, CirculantOperator};
use ncs::ops::*;
use ncs::rng::Stream;
use proptest::prelude::*;

fn neumann_laplacian(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            if i == 0 || i == n - 1 {
                1.0
            } else {
                2.0
            }
        } else if i.abs_diff(j) == 1 {
            -1.0
        } else {
            0.0
        }
    })
}

#[test]
fn gradient_normal_matches_kronecker_laplacian() {
    for n in [2, 3, 5, 8] {
        let l = neumann_laplacian(n);
        let id = DMatrix::<f64>::identity(n, n);
        let l2 = id.kronecker(&l) + l.kronecker(&id);
        let dtd = materialize(&NormalMap::new(FiniteDifference::new(n)));
        assert!((dtd - l2).abs().max() < 1e-12, "n = {n}");
    }
}

#[test]
fn gradient_of_constant_vanishes() {
    let g = grad_forward(&ImageGrid::constant(7, 2.5));
    assert!(g.as_slice().iter().all(|&v| v == 0.0));
    assert_eq!(g.horizontal().len(), 7 * 6);
}

#[test]
fn radon_impulse_profile_integrates_to_one() {
    let n = 64;
    let mut x = ImageGrid::zeros(n);
    x.set(n / 2, n / 2, 1.0);
    let beam = ParallelBeam::with_default_detectors(n, 36).unwrap();
    let s = beam.project(&x).unwrap();
    for t in 0..36 {
        let total: f64 = s.row(t).iter().sum();
        assert!((total - 1.0).abs() < 0.05, "angle {t}: {total}");
    }
}

#[test]
fn standard_geometry_shape() {
    let beam = ParallelBeam::new(512, 60, 729).unwrap();
    assert_eq!((beam.n_angles(), beam.n_detectors()), (60, 729));
    assert_eq!(beam.range_dim(), 43_740);
}

#[test]
fn single_bin_backprojects_to_a_line() {
    let n = 8;
    let beam = ParallelBeam::with_default_detectors(n, 4).unwrap();
    let (angles, dets) = (beam.n_angles(), beam.n_detectors());
    for t in 0..angles {
        let d = dets / 2 + 1;
        let mut y = vec![0.0; angles * dets];
        y[t * dets + d] = 1.0;
        let img = beam.adjoint(&y);
        let theta = t as f64 * std::f64::consts::PI / angles as f64;
        let s = d as f64 - (dets as f64 - 1.0) / 2.0;
        let c = (n as f64 - 1.0) / 2.0;
        let mut hit = 0;
        for i in 0..n {
            for j in 0..n {
                let v = img[i * n + j];
                if v != 0.0 {
                    hit += 1;
                    let (u, w) = (j as f64 - c, c - i as f64);
                    let dist = (u * theta.cos() + w * theta.sin() - s).abs();
                    assert!(dist < 1.5, "pixel ({i},{j}) lies {dist} from the line");
                }
            }
        }
        assert!(hit >= n - 1, "angle {t}: only {hit} pixels");
        // The scattered weights sum to the bin's row sum.
        let row_sum: f64 = (0..n * n)
            .map(|p| {
                let mut e = vec![0.0; n * n];
                e[p] = 1.0;
                beam.forward(&e)[t * dets + d]
            })
            .sum();
        assert!((img.iter().sum::<f64>() - row_sum).abs() < 1e-12);
    }
}

#[test]
fn radon_is_linear() {
    let n = 24;
    let beam = ParallelBeam::with_default_detectors(n, 17).unwrap();
    let mut s = Stream::new(4);
    let x = gaussian(&mut s, n * n);
    let y = gaussian(&mut s, n * n);
    let (a, b) = (1.7, -0.3);
    let combo: Vec<f64> = x.iter().zip(&y).map(|(x, y)| a * x + b * y).collect();
    let lhs = beam.forward(&combo);
    let rx = beam.forward(&x);
    let ry = beam.forward(&y);
    let rhs: Vec<f64> = rx.iter().zip(&ry).map(|(x, y)| a * x + b * y).collect();
    let scale = rhs.iter().map(|v| v.abs()).fold(1.0, f64::max);
    assert!(max_abs_diff(&lhs, &rhs) <= 1e-12 * scale);
}

#[test]
fn coverage_precondition_enforced() {
    assert!(ParallelBeam::new(64, 10, min_detectors(64) - 2).is_err());
    assert!(ParallelBeam::new(64, 10, 92).is_err());
    assert!(radon_forward(&ImageGrid::zeros(64), 10, 91).is_ok());
}

/// Chord length of the line `src + t·dir` through `[-h, h]²`, by clipping
/// against each edge in turn.
fn chord(src: [f64; 2], dir: [f64; 2], h: f64) -> f64 {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..2 {
        for (p, q) in [(-dir[k], src[k] + h), (dir[k], h - src[k])] {
            if p == 0.0 {
                if q < 0.0 {
                    return 0.0;
                }
            } else if p < 0.0 {
                lo = lo.max(q / p);
            } else {
                hi = hi.min(q / p);
            }
        }
    }
    (hi - lo).max(0.0)
}

#[test]
fn fanbeam_row_sums_are_chord_lengths() {
    let n = 20;
    let fan = FanBeam::new(n, 9, 31, n as f64, default_fan_angle(n, n as f64)).unwrap();
    let sums = fan.matrix().row_sums();
    let x = fan.forward(ImageGrid::constant(n, 3.0).as_slice());
    for (r, sum) in sums.iter().enumerate() {
        let (src, dir) = fan.ray(r);
        let expected = chord(src, dir, n as f64 / 2.0);
        assert!((sum - expected).abs() < 1e-9, "ray {r}: {sum} vs {expected}");
        assert!((x[r] - 3.0 * expected).abs() < 1e-9);
    }
}

#[test]
fn fanbeam_rejects_inner_source() {
    assert!(build_fanbeam(16, 8, 8, 11.0, 1.0).is_err());
    assert!(build_fanbeam(16, 8, 8, 12.0, 1.0).is_ok());
}

#[test]
fn stacked_adjoint_is_weighted_sum() {
    let n = 12;
    let r: Arc<dyn LinearMap> = Arc::new(ParallelBeam::with_default_detectors(n, 7).unwrap());
    let d: Arc<dyn LinearMap> = Arc::new(FiniteDifference::new(n));
    let stack = StackedMap::new(vec![(1.0, r.clone()), (2.5, d.clone())]).unwrap();
    let mut s = Stream::new(8);
    let y = gaussian(&mut s, stack.range_dim());
    let got = stack.adjoint(&y);
    let a = r.adjoint(&y[stack.block_range(0)]);
    let b = d.adjoint(&y[stack.block_range(1)]);
    let want: Vec<f64> = a.iter().zip(&b).map(|(a, b)| a + 2.5 * b).collect();
    assert!(max_abs_diff(&got, &want) < 1e-12);
}

#[test]
fn dense_pseudoinverse_is_moore_penrose() {
    let mut s = Stream::new(12);
    let a = DMatrix::from_fn(12, 8, |_, _| s.standard_normal());
    let map = DenseMap::new(a.clone());
    let p = map.pinv(1e-12);
    assert!((&a * &p * &a - &a).abs().max() < 1e-10);
    assert!((&p * &a * &p - &p).abs().max() < 1e-10);
    assert!(((&a * &p).transpose() - &a * &p).abs().max() < 1e-10);
    assert!(((&p * &a).transpose() - &p * &a).abs().max() < 1e-10);
}

#[test]
fn normal_pseudoinverse_projects_onto_row_space() {
    let mut s = Stream::new(13);
    // Rank-deficient: 6×10, so AᵀA has a 4-dimensional null space.
    let a = DMatrix::from_fn(6, 10, |_, _| s.standard_normal());
    let map = DenseMap::new(a.clone());
    let ata = a.transpose() * &a;
    let proj = map.normal_pinv(1e-12) * &ata;
    let y = nalgebra::DVector::from_fn(6, |_, _| s.standard_normal());
    let v = a.transpose() * y;
    assert!((&proj * &v - &v).abs().max() < 1e-10 * v.abs().max());
}

#[test]
fn identity_dense_map() {
    let map = DenseMap::new(DMatrix::identity(5, 5));
    let x = [1.0, -2.0, 3.0, 0.5, 0.0];
    assert_eq!(map.forward(&x), x.to_vec());
    assert_eq!(map.adjoint(&x), x.to_vec());
}

#[test]
fn radon_normal_operator_is_near_circulant() {
    let n = 16;
    let beam = ParallelBeam::with_default_detectors(n, 24).unwrap();
    let rtr = materialize(&NormalMap::new(&beam));
    let fro = rtr.norm();
    let est = empirical_mask(&NormalMap::new(&beam), 20, 3).unwrap();
    let circ = materialize(&CirculantOperator::new(est.mask));
    let circ_err = (&rtr - circ).norm() / fro;
    let c = rtr.trace() / (n * n) as f64;
    let id_err = (&rtr - DMatrix::<f64>::identity(n * n, n * n) * c).norm() / fro;
    assert!(circ_err < id_err, "circulant fit {circ_err} vs scaled identity {id_err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_operator_passes_adjoint_probe(n in 4usize..20, angles in 1usize..12, seed in any::<u64>()) {
        let beam = ParallelBeam::with_default_detectors(n, angles).unwrap();
        prop_assert!(worst_adjoint_gap(&beam, 5, seed) <= 1e-10);
        prop_assert!(worst_adjoint_gap(&FiniteDifference::new(n), 5, seed) <= 1e-12);
        let fan = FanBeam::new(n, angles, 2 * n + 1, 1.5 * n as f64, 1.2).unwrap();
        prop_assert!(worst_adjoint_gap(&fan, 5, seed) <= 1e-12);
    }

    #[test]
    fn matrix_free_radon_matches_stored(n in 2usize..12, angles in 1usize..6, seed in any::<u64>()) {
        let beam = ParallelBeam::with_default_detectors(n, angles).unwrap();
        let mut s = Stream::new(seed);
        let x = gaussian(&mut s, n * n);
        let y = gaussian(&mut s, beam.range_dim());
        let fwd = radon_forward(&ImageGrid::from_vec(n, x.clone()).unwrap(), angles, beam.n_detectors()).unwrap();
        prop_assert_eq!(fwd.into_vec(), beam.forward(&x));
        let sino = Sinogram::from_vec(angles, beam.n_detectors(), y.clone()).unwrap();
        prop_assert_eq!(radon_adjoint(&sino, n).unwrap().into_vec(), beam.adjoint(&y));
    }
}
