//! Fan-beam projector built by exact ray/pixel intersection lengths.
//!
//! The source circles the image at `source_radius`; view `v` places it at
//! angle `2πv/n_views`. Rays fan out symmetrically about the line through
//! the image center, `fan_angle` wide. Pixel `(i, j)` covers
//! `[j - N/2, j + 1 - N/2] × [N/2 - i - 1, N/2 - i]`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::map::LinearMap;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct FanBeam {
    n: usize,
    n_views: usize,
    n_rays: usize,
    source_radius: f64,
    fan_angle: f64,
    matrix: Arc<CsrMatrix>,
}

/// Fan angle whose edge rays graze the circle through the image corners.
pub fn default_fan_angle(n: usize, source_radius: f64) -> f64 {
    let corner = n as f64 * std::f64::consts::SQRT_2 / 2.0;
    2.0 * (corner / source_radius).min(1.0).asin()
}

impl FanBeam {
    pub fn new(n: usize, n_views: usize, n_rays: usize, source_radius: f64, fan_angle: f64) -> Result<Self> {
        if n == 0 || n_views == 0 || n_rays == 0 {
            return Err(Error::Geometry("sizes must be positive".into()));
        }
        let corner = n as f64 * std::f64::consts::SQRT_2 / 2.0;
        if !(source_radius > corner) {
            return Err(Error::Geometry(format!(
                "source radius {source_radius} lies inside the image circle (radius {corner})"
            )));
        }
        if !(fan_angle > 0.0 && fan_angle < PI) {
            return Err(Error::Geometry(format!("fan angle {fan_angle} outside (0, π)")));
        }
        let mut geom = Self {
            n,
            n_views,
            n_rays,
            source_radius,
            fan_angle,
            matrix: Arc::new(CsrMatrix::from_rows(0, 0, |_, _| {})),
        };
        let matrix = CsrMatrix::from_rows(n_views * n_rays, n * n, |r, buf| {
            let (src, dir) = geom.ray(r);
            siddon(n, src, dir, buf);
        });
        geom.matrix = Arc::new(matrix);
        Ok(geom)
    }

    /// Builds from a stored matrix, e.g. one read from a triplet file.
    pub fn from_matrix(n: usize, matrix: CsrMatrix) -> Result<Self> {
        if matrix.cols() != n * n {
            return Err(Error::SizeMismatch {
                expected: n * n,
                actual: matrix.cols(),
                context: "fan-beam matrix columns",
            });
        }
        Ok(Self {
            n,
            n_views: 0,
            n_rays: matrix.rows(),
            source_radius: f64::NAN,
            fan_angle: f64::NAN,
            matrix: Arc::new(matrix),
        })
    }

    /// Source position and unit direction of measurement `r` (view-major).
    pub fn ray(&self, r: usize) -> ([f64; 2], [f64; 2]) {
        let view = r / self.n_rays;
        let k = r % self.n_rays;
        let beta = 2.0 * PI * view as f64 / self.n_views as f64;
        let src = [self.source_radius * beta.cos(), self.source_radius * beta.sin()];
        let phi = -self.fan_angle / 2.0 + self.fan_angle * (k as f64 + 0.5) / self.n_rays as f64;
        let central = beta + PI;
        let a = central + phi;
        (src, [a.cos(), a.sin()])
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn image_size(&self) -> usize {
        self.n
    }

    pub fn n_views(&self) -> usize {
        self.n_views
    }

    pub fn n_rays(&self) -> usize {
        self.n_rays
    }

    pub fn source_radius(&self) -> f64 {
        self.source_radius
    }

    pub fn fan_angle(&self) -> f64 {
        self.fan_angle
    }
}

/// Appends `(pixel, length)` for every pixel the ray crosses.
fn siddon(n: usize, src: [f64; 2], dir: [f64; 2], buf: &mut Vec<(u32, f64)>) {
    let half = n as f64 / 2.0;
    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for axis in 0..2 {
        if dir[axis] == 0.0 {
            if src[axis] <= -half || src[axis] >= half {
                return;
            }
            continue;
        }
        let a = (-half - src[axis]) / dir[axis];
        let b = (half - src[axis]) / dir[axis];
        t_lo = t_lo.max(a.min(b));
        t_hi = t_hi.min(a.max(b));
    }
    if !(t_hi > t_lo) {
        return;
    }
    let mut ts = vec![t_lo, t_hi];
    for axis in 0..2 {
        if dir[axis] == 0.0 {
            continue;
        }
        for m in 1..n {
            let plane = -half + m as f64;
            let t = (plane - src[axis]) / dir[axis];
            if t > t_lo && t < t_hi {
                ts.push(t);
            }
        }
    }
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for w in ts.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let tm = 0.5 * (w[0] + w[1]);
        let u = src[0] + tm * dir[0];
        let v = src[1] + tm * dir[1];
        let j = (u + half).floor();
        let i = (half - v).floor();
        if j < 0.0 || i < 0.0 || j >= n as f64 || i >= n as f64 {
            continue;
        }
        buf.push(((i as usize * n + j as usize) as u32, len));
    }
}

impl LinearMap for FanBeam {
    fn domain_dim(&self) -> usize {
        self.n * self.n
    }

    fn range_dim(&self) -> usize {
        self.matrix.rows()
    }

    fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        self.matrix.forward_into(x, out)
    }

    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        self.matrix.adjoint_into(y, out)
    }
}

/// Fan-beam system matrix for an `n×n` image.
pub fn build_fanbeam(
    n: usize,
    n_views: usize,
    n_rays: usize,
    source_radius: f64,
    fan_angle: f64,
) -> Result<FanBeam> {
    FanBeam::new(n, n_views, n_rays, source_radius, fan_angle)
}
