//! Ray-driven discrete Radon transform.
//!
//! Each ray `(θ, s)` is sampled at unit steps along its direction and the
//! image is read with bilinear interpolation (zero outside the grid). The
//! adjoint scatters exactly the same weights, so `R` and `Rᵀ` are transposes
//! of one discretization. This is not a filtered backprojection.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::grid::{ImageGrid, Sinogram};
use super::map::LinearMap;
use super::sparse::CsrMatrix;
use crate::error::{check_len, Error, Result};

/// Above this estimated nonzero count the operator is applied matrix-free.
const MAX_STORED_NNZ: f64 = 2.0e7;

/// Smallest odd detector count accepted for an `n×n` image: `ceil(√2·n)`
/// rounded up to odd.
pub fn min_detectors(n: usize) -> usize {
    let d = (std::f64::consts::SQRT_2 * n as f64).ceil() as usize;
    d | 1
}

/// Default detector count: the smallest odd integer `>= √2·n + 1`.
pub fn default_detectors(n: usize) -> usize {
    let d = (std::f64::consts::SQRT_2 * n as f64 + 1.0).ceil() as usize;
    d | 1
}

/// Parallel-beam geometry with angles `tπ/n_angles` on `[0, π)`.
#[derive(Clone, Debug)]
pub struct ParallelBeam {
    n: usize,
    n_angles: usize,
    n_detectors: usize,
    trig: Vec<(f64, f64)>,
    matrix: Option<CsrMatrix>,
}

impl ParallelBeam {
    pub fn new(n: usize, n_angles: usize, n_detectors: usize) -> Result<Self> {
        if n == 0 || n_angles == 0 {
            return Err(Error::Geometry("image size and angle count must be positive".into()));
        }
        if n_detectors % 2 == 0 {
            return Err(Error::Geometry(format!(
                "detector count must be odd, got {n_detectors}"
            )));
        }
        let min = min_detectors(n);
        if n_detectors < min {
            return Err(Error::Geometry(format!(
                "{n_detectors} detectors do not cover a {n}x{n} image (need at least {min})"
            )));
        }
        let trig = (0..n_angles)
            .map(|t| {
                let theta = t as f64 * PI / n_angles as f64;
                (theta.cos(), theta.sin())
            })
            .collect();
        let mut op = Self {
            n,
            n_angles,
            n_detectors,
            trig,
            matrix: None,
        };
        let est_nnz = (n_angles * n_detectors) as f64 * n as f64 * 2.5;
        if est_nnz <= MAX_STORED_NNZ {
            let matrix = CsrMatrix::from_rows(op.range_dim(), op.domain_dim(), |r, buf| {
                op.ray_entries(r, buf)
            });
            op.matrix = Some(matrix);
        }
        Ok(op)
    }

    /// Geometry with [`default_detectors`].
    pub fn with_default_detectors(n: usize, n_angles: usize) -> Result<Self> {
        Self::new(n, n_angles, default_detectors(n))
    }

    pub fn image_size(&self) -> usize {
        self.n
    }

    pub fn n_angles(&self) -> usize {
        self.n_angles
    }

    pub fn n_detectors(&self) -> usize {
        self.n_detectors
    }

    pub fn is_matrix_free(&self) -> bool {
        self.matrix.is_none()
    }

    /// Unmerged bilinear weights of ray `r` (angle-major), appended to `buf`.
    fn ray_entries(&self, r: usize, buf: &mut Vec<(u32, f64)>) {
        let n = self.n;
        let t = r / self.n_detectors;
        let d = r % self.n_detectors;
        let (cos_t, sin_t) = self.trig[t];
        let center = (n as f64 - 1.0) / 2.0;
        let s = d as f64 - (self.n_detectors as f64 - 1.0) / 2.0;
        let reach = ((center + 1.0) * std::f64::consts::SQRT_2).ceil() as i64;
        let nf = n as f64;
        for step in -reach..=reach {
            let tau = step as f64;
            let u = s * cos_t - tau * sin_t;
            let v = s * sin_t + tau * cos_t;
            let cx = u + center;
            let ry = center - v;
            if cx <= -1.0 || ry <= -1.0 || cx >= nf || ry >= nf {
                continue;
            }
            let j0 = cx.floor();
            let i0 = ry.floor();
            let fx = cx - j0;
            let fy = ry - i0;
            let (j0, i0) = (j0 as i64, i0 as i64);
            let corners = [
                (i0, j0, (1.0 - fx) * (1.0 - fy)),
                (i0, j0 + 1, fx * (1.0 - fy)),
                (i0 + 1, j0, (1.0 - fx) * fy),
                (i0 + 1, j0 + 1, fx * fy),
            ];
            for (i, j, w) in corners {
                if w != 0.0 && i >= 0 && j >= 0 && (i as usize) < n && (j as usize) < n {
                    buf.push(((i as usize * n + j as usize) as u32, w));
                }
            }
        }
    }

    fn merged_ray(&self, r: usize, buf: &mut Vec<(u32, f64)>) {
        buf.clear();
        self.ray_entries(r, buf);
        buf.sort_by_key(|e| e.0);
        let mut w = 0;
        for i in 1..buf.len() {
            if buf[i].0 == buf[w].0 {
                buf[w].1 += buf[i].1;
            } else {
                w += 1;
                buf[w] = buf[i];
            }
        }
        if !buf.is_empty() {
            buf.truncate(w + 1);
        }
    }

    pub fn project(&self, x: &ImageGrid) -> Result<Sinogram> {
        check_len(self.n, x.size(), "radon input image size")?;
        Sinogram::from_vec(self.n_angles, self.n_detectors, self.forward(x.as_slice()))
    }

    pub fn backproject(&self, s: &Sinogram) -> Result<ImageGrid> {
        if s.shape() != (self.n_angles, self.n_detectors) {
            return Err(Error::SizeMismatch {
                expected: self.range_dim(),
                actual: s.as_slice().len(),
                context: "radon adjoint sinogram shape",
            });
        }
        ImageGrid::from_vec(self.n, self.adjoint(s.as_slice()))
    }
}

impl LinearMap for ParallelBeam {
    fn domain_dim(&self) -> usize {
        self.n * self.n
    }

    fn range_dim(&self) -> usize {
        self.n_angles * self.n_detectors
    }

    fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        if let Some(m) = &self.matrix {
            return m.forward_into(x, out);
        }
        out.par_iter_mut().enumerate().for_each_init(Vec::new, |buf, (r, o)| {
            self.merged_ray(r, buf);
            let mut acc = 0.0;
            for &(c, w) in buf.iter() {
                acc += w * x[c as usize];
            }
            *o = acc;
        });
    }

    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        if let Some(m) = &self.matrix {
            return m.adjoint_into(y, out);
        }
        // Row-ordered scatter: same summation order as the stored transpose.
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut buf = Vec::new();
        for (r, &yr) in y.iter().enumerate() {
            self.merged_ray(r, &mut buf);
            for &(c, w) in &buf {
                out[c as usize] += w * yr;
            }
        }
    }
}

/// Line integrals of `x` for `n_angles` equispaced angles and `n_detectors`
/// unit-spaced detectors.
pub fn radon_forward(x: &ImageGrid, n_angles: usize, n_detectors: usize) -> Result<Sinogram> {
    ParallelBeam::new(x.size(), n_angles, n_detectors)?.project(x)
}

/// Exact transpose of [`radon_forward`] onto an `n×n` grid.
pub fn radon_adjoint(s: &Sinogram, n: usize) -> Result<ImageGrid> {
    ParallelBeam::new(n, s.n_angles(), s.n_detectors())?.backproject(s)
}
