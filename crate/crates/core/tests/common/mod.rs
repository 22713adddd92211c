#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::DMatrix;
use ncs::circulant::{Fft2, SpectralMask};
use ncs::models::{ct_tv_problem, Geometry, TvParams};
use ncs::ops::{default_detectors, dot, norm, LinearMap};
use ncs::phantom::shepp_logan;
use ncs::rng::Stream;
use ncs::simulate::simulate_ct;
use ncs::solvers::SplitProblem;
use rustfft::num_complex::Complex64;

pub fn gaussian(stream: &mut Stream, len: usize) -> Vec<f64> {
    (0..len).map(|_| stream.standard_normal()).collect()
}

/// Largest `|⟨Ax,y⟩ - ⟨x,Aᵀy⟩| / (‖Ax‖‖y‖)` over `probes` random pairs.
pub fn worst_adjoint_gap(map: &dyn LinearMap, probes: usize, seed: u64) -> f64 {
    let mut s = Stream::new(seed);
    (0..probes)
        .map(|_| {
            let x = gaussian(&mut s, map.domain_dim());
            let y = gaussian(&mut s, map.range_dim());
            let ax = map.forward(&x);
            let lhs = dot(&ax, &y);
            let rhs = dot(&x, &map.adjoint(&y));
            let scale = norm(&ax) * norm(&y);
            if scale == 0.0 {
                (lhs - rhs).abs()
            } else {
                (lhs - rhs).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// Naive 2D DFT of a real `n×n` array, unnormalized.
pub fn naive_dft(x: &[f64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); n * n];
    for j in 0..n {
        for k in 0..n {
            let mut acc = Complex64::default();
            for p in 0..n {
                for q in 0..n {
                    let t = -2.0 * std::f64::consts::PI * ((j * p + k * q) % n) as f64 / n as f64;
                    acc += x[p * n + q] * Complex64::new(t.cos(), t.sin());
                }
            }
            out[j * n + k] = acc;
        }
    }
    out
}

/// Random complex mask; roughly a quarter of the bins are exactly zero and
/// the rest have modulus in [0.1, 2].
pub fn random_mask(s: &mut Stream, n: usize) -> SpectralMask {
    let values = (0..n * n)
        .map(|_| {
            if s.uniform() < 0.25 {
                Complex64::default()
            } else {
                Complex64::from_polar(0.1 + 1.9 * s.uniform(), std::f64::consts::TAU * s.uniform())
            }
        })
        .collect();
    SpectralMask::new(n, values).unwrap()
}

/// `F⁻¹ diag(h) F` as a dense complex matrix, through the library FFT.
pub fn fft_circulant(h: &SpectralMask) -> DMatrix<Complex64> {
    let n = h.size();
    let fft = Fft2::new(n);
    let dim = n * n;
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut e = vec![Complex64::default(); dim];
        e[col] = Complex64::new(1.0, 0.0);
        fft.forward(&mut e);
        for (v, w) in e.iter_mut().zip(h.values()) {
            *v *= w;
        }
        fft.inverse(&mut e);
        for row in 0..dim {
            m[(row, col)] = e[row];
        }
    }
    m
}

/// Minimizer of `c·(-ln(1 - v)) + ½(v - u)²` over `v < 1` by bisection on
/// the derivative; for `c = 0` the domain is `v ≤ 1`.
pub fn poisson_oracle(u: f64, c: f64) -> f64 {
    if c == 0.0 {
        return u.min(1.0);
    }
    let dphi = |v: f64| c / (1.0 - v) + v - u;
    let (mut lo, mut hi) = (u.min(1.0) - c - 1.0, 1.0);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if dphi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Dense `n²×n²` matrix of the 2D circulant with mask `h`, built from the
/// DFT definition `C = F⁻¹ diag(h) F` entry by entry.
pub fn dense_circulant(h: &SpectralMask) -> DMatrix<Complex64> {
    let n = h.size();
    let dim = n * n;
    let w = |a: usize, b: usize| {
        let t = -2.0 * std::f64::consts::PI * (a as f64) * (b as f64) / n as f64;
        Complex64::new(t.cos(), t.sin())
    };
    // The first column c = F⁻¹h; C[(p,q),(r,s)] = c[(p-r) mod n, (q-s) mod n].
    let mut c = vec![Complex64::default(); dim];
    for p in 0..n {
        for q in 0..n {
            let mut acc = Complex64::default();
            for j in 0..n {
                for k in 0..n {
                    acc += h.get(j, k) * w(j, p).conj() * w(k, q).conj();
                }
            }
            c[p * n + q] = acc / dim as f64;
        }
    }
    DMatrix::from_fn(dim, dim, |row, col| {
        let (p, q) = (row / n, row % n);
        let (r, s) = (col / n, col % n);
        c[((p + n - r) % n) * n + (q + n - s) % n]
    })
}

/// Small noisy TV-CT instance: Shepp–Logan, parallel beam.
pub struct TvCase {
    pub geometry: Geometry,
    pub data: Vec<f64>,
}

impl TvCase {
    pub fn new(n: usize, angles: usize, seed: u64) -> Self {
        let geometry = Geometry::parallel(n, angles, default_detectors(n)).unwrap();
        let x = shepp_logan(n).unwrap();
        let data = simulate_ct(&x, &geometry, 0.05, seed).unwrap().into_vec();
        Self { geometry, data }
    }

    pub fn problem(&self, params: &TvParams) -> SplitProblem {
        ct_tv_problem(self.geometry.map(), self.data.clone(), params).unwrap()
    }

    pub fn map(&self) -> Arc<dyn LinearMap> {
        self.geometry.map()
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Moore–Penrose pseudoinverse `C⁺ = V Σ⁻² Vᴴ Cᴴ`, with the right singular
/// vectors `V` and `Σ²` taken from the Hermitian eigendecomposition of
/// `CᴴC` (through its real embedding `[[X, -Y], [Y, X]]`). Eigenvalues
/// `σ²` below `rel_tol·σ²_max` are dropped. nalgebra's bidiagonal SVD returns
/// wrong factors for some of these rank-deficient inputs, so it is not used.
pub fn complex_pinv(c: &DMatrix<Complex64>, rel_tol: f64) -> DMatrix<Complex64> {
    let k = c.ncols();
    let gram = c.adjoint() * c;
    let real = DMatrix::from_fn(2 * k, 2 * k, |i, j| {
        let z = gram[(i % k, j % k)];
        match (i < k, j < k) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let eig = real.symmetric_eigen();
    let top = eig.eigenvalues.max();
    let cutoff = rel_tol * top;
    // Each eigenpair of the embedding appears twice; halving the sum of all
    // 2k rank-one terms gives the complex projector-weighted inverse.
    let mut inv = DMatrix::<Complex64>::zeros(k, k);
    for (idx, &l) in eig.eigenvalues.iter().enumerate() {
        if l <= cutoff {
            continue;
        }
        let v = eig.eigenvectors.column(idx);
        let z = nalgebra::DVector::from_fn(k, |i, _| Complex64::new(v[i], v[i + k]));
        inv += (&z * z.adjoint()) * Complex64::new(0.5 / l, 0.0);
    }
    inv * c.adjoint()
}
