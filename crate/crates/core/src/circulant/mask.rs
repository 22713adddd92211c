use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::fft2::Fft2;
use crate::error::{check_len, Error, Result};
use crate::ops::{ImageGrid, LinearMap};

/// Relative threshold below which mask entries are treated as zero when
/// pseudoinverting.
pub const DEFAULT_PINV_REL_TOL: f64 = 1e-12;

/// Eigenvalues `h` of a circulant operator on `N×N` images, in DFT order:
/// entry `(j, k)` belongs to row frequency `j` and column frequency `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMask {
    n: usize,
    values: Vec<Complex64>,
}

impl SpectralMask {
    pub fn new(n: usize, values: Vec<Complex64>) -> Result<Self> {
        check_len(n * n, values.len(), "spectral mask values")?;
        Ok(Self { n, values })
    }

    pub fn from_real(n: usize, values: Vec<f64>) -> Result<Self> {
        check_len(n * n, values.len(), "spectral mask values")?;
        Ok(Self {
            n,
            values: values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                values.push(Complex64::new(f(j, k), 0.0));
            }
        }
        Self { n, values }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self::from_fn(n, |_, _| value)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.values[j * self.n + k]
    }

    pub fn set(&mut self, j: usize, k: usize, value: Complex64) {
        self.values[j * self.n + k] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `h[j,k] == conj(h[-j,-k])` within `tol·max|h|`.
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        let n = self.n;
        let bound = tol * self.max_abs().max(f64::MIN_POSITIVE);
        (0..n).all(|j| {
            (0..n).all(|k| {
                let mirror = self.get((n - j) % n, (n - k) % n);
                (self.get(j, k) - mirror.conj()).norm() <= bound
            })
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: f64, other: &SpectralMask) -> Result<Self> {
        check_len(self.n, other.n, "spectral mask size")?;
        Ok(Self {
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b * c)
                .collect(),
        })
    }

    pub fn add_constant(&self, c: f64) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.re).collect()
    }
}

/// A circulant operator with cached FFT plans.
#[derive(Clone, Debug)]
pub struct CirculantOperator {
    mask: SpectralMask,
    fft: Fft2,
}

impl CirculantOperator {
    pub fn new(mask: SpectralMask) -> Self {
        let fft = Fft2::new(mask.size());
        Self { mask, fft }
    }

    pub fn mask(&self) -> &SpectralMask {
        &self.mask
    }

    fn apply(&self, x: &[f64], out: &mut [f64], conjugate: bool) {
        let mut buf = self.fft.forward_real(x);
        for (b, h) in buf.iter_mut().zip(&self.mask.values) {
            *b *= if conjugate { h.conj() } else { *h };
        }
        self.fft.inverse(&mut buf);
        for (o, b) in out.iter_mut().zip(&buf) {
            *o = b.re;
        }
    }
}

impl LinearMap for CirculantOperator {
    fn domain_dim(&self) -> usize {
        self.mask.n * self.mask.n
    }

    fn range_dim(&self) -> usize {
        self.domain_dim()
    }

    fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        self.apply(x, out, false);
    }

    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        self.apply(y, out, true);
    }
}

/// Real part of `F⁻¹(h ⊙ Fx)`.
pub fn apply_circulant(mask: &SpectralMask, x: &ImageGrid) -> Result<ImageGrid> {
    check_len(mask.size(), x.size(), "circulant mask vs image size")?;
    let op = CirculantOperator::new(mask.clone());
    ImageGrid::from_vec(x.size(), op.forward(x.as_slice()))
}

/// Componentwise pseudoinverse: `1/h` where `|h| > rel_tol·max|h|`, else 0.
pub fn pinv_mask(mask: &SpectralMask, rel_tol: f64) -> Result<SpectralMask> {
    if !(rel_tol >= 0.0) {
        return Err(Error::invalid("rel_tol", "must be nonnegative"));
    }
    let cutoff = rel_tol * mask.max_abs();
    let values = mask
        .values
        .iter()
        .map(|&h| {
            if h.norm() > cutoff && h.norm() > 0.0 {
                h.inv()
            } else {
                Complex64::default()
            }
        })
        .collect();
    Ok(SpectralMask {
        n: mask.n,
        values,
    })
}

/// Eigenvalues of the periodic 5-point Laplacian:
/// `4(sin²(jπ/N) + sin²(kπ/N))`.
pub fn laplacian_mask_2d(n: usize) -> SpectralMask {
    let s2 = |i: usize| (i as f64 * PI / n as f64).sin().powi(2);
    SpectralMask::from_fn(n, |j, k| 4.0 * (s2(j) + s2(k)))
}

/// Radial mask `C_R / sqrt(min(j,N-j)² + min(k,N-k)²)` modelling the
/// `1/|ω|` response of backprojection after projection; the DC entry is set
/// to `dc_value`.
pub fn radon_mask(n: usize, scale: f64, dc_value: f64) -> Result<SpectralMask> {
    if n < 2 {
        return Err(Error::invalid("n", "radon mask needs N >= 2"));
    }
    if !(scale > 0.0) {
        return Err(Error::invalid("scale", "C_R must be positive"));
    }
    if !(dc_value >= 0.0) {
        return Err(Error::invalid("dc_value", "must be nonnegative"));
    }
    let fold = |i: usize| i.min(n - i) as f64;
    Ok(SpectralMask::from_fn(n, |j, k| {
        if j == 0 && k == 0 {
            dc_value
        } else {
            scale / (fold(j).powi(2) + fold(k).powi(2)).sqrt()
        }
    }))
}
