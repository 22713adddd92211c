//! Ellipse phantoms.
//!
//! Coordinates live on `[-1, 1]²` with `y` pointing up; pixel `(i, j)` of
//! an `N×N` grid is sampled at its center `((2j+1)/N - 1, 1 - (2i+1)/N)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ops::ImageGrid;

/// Smallest supported phantom size.
pub const MIN_SIZE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center: [f64; 2],
    /// Semi-axes along the rotated x and y directions.
    pub axes: [f64; 2],
    /// Counter-clockwise rotation in degrees.
    pub angle_deg: f64,
    /// Added to every pixel whose center lies inside.
    pub intensity: f64,
}

impl Ellipse {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.angle_deg.to_radians().sin_cos();
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        let p = (dx * c + dy * s) / self.axes[0];
        let q = (-dx * s + dy * c) / self.axes[1];
        p * p + q * q <= 1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub size: usize,
    pub ellipses: Vec<Ellipse>,
}

// Modified Shepp–Logan (Toft): higher-contrast interior than the original.
// (intensity, a, b, x0, y0, angle)
const SHEPP_LOGAN: [[f64; 6]; 10] = [
    [1.0, 0.69, 0.92, 0.0, 0.0, 0.0],
    [-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0],
    [-0.2, 0.11, 0.31, 0.22, 0.0, -18.0],
    [-0.2, 0.16, 0.41, -0.22, 0.0, 18.0],
    [0.1, 0.21, 0.25, 0.0, 0.35, 0.0],
    [0.1, 0.046, 0.046, 0.0, 0.1, 0.0],
    [0.1, 0.046, 0.046, 0.0, -0.1, 0.0],
    [0.1, 0.046, 0.023, -0.08, -0.605, 0.0],
    [0.1, 0.023, 0.023, 0.0, -0.606, 0.0],
    [0.1, 0.023, 0.046, 0.06, -0.605, 0.0],
];

impl PhantomSpec {
    pub fn shepp_logan(size: usize) -> Self {
        let ellipses = SHEPP_LOGAN
            .iter()
            .map(|&[intensity, a, b, x0, y0, angle_deg]| Ellipse {
                center: [x0, y0],
                axes: [a, b],
                angle_deg,
                intensity,
            })
            .collect();
        Self { size, ellipses }
    }

    /// Parse a JSON spec. `size` may be omitted when `default_size` is given.
    pub fn from_json(text: &str, default_size: Option<usize>) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            size: Option<usize>,
            ellipses: Vec<Ellipse>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::invalid("phantom spec", e.to_string()))?;
        let size = default_size
            .or(raw.size)
            .ok_or_else(|| Error::invalid("phantom spec", "no size given"))?;
        Ok(Self {
            size,
            ellipses: raw.ellipses,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < MIN_SIZE {
            return Err(Error::invalid("size", format!("phantoms need N ≥ {MIN_SIZE}")));
        }
        for e in &self.ellipses {
            let finite = e.center.iter().chain(&e.axes).chain([&e.angle_deg, &e.intensity]).all(|v| v.is_finite());
            if !finite {
                return Err(Error::invalid("ellipse", "parameters must be finite"));
            }
            if e.axes.iter().any(|&a| a <= 0.0) {
                return Err(Error::invalid("ellipse", "semi-axes must be positive"));
            }
        }
        Ok(())
    }
}

/// Rasterize: sum of ellipse intensities at each pixel center.
pub fn make_phantom(spec: &PhantomSpec) -> Result<ImageGrid> {
    spec.validate()?;
    let n = spec.size as f64;
    Ok(ImageGrid::from_fn(spec.size, |i, j| {
        let x = (2 * j + 1) as f64 / n - 1.0;
        let y = 1.0 - (2 * i + 1) as f64 / n;
        let (mut sum, mut mass) = (0.0, 0.0);
        for e in spec.ellipses.iter().filter(|e| e.contains(x, y)) {
            sum += e.intensity;
            mass += e.intensity.abs();
        }
        // Cancelling intensities (1 - 0.8 - 0.2) leave rounding residue;
        // snap it so exactly-zero regions stay zero and nonnegative.
        if sum.abs() <= 1e-12 * mass {
            0.0
        } else {
            sum
        }
    }))
}

pub fn shepp_logan(size: usize) -> Result<ImageGrid> {
    make_phantom(&PhantomSpec::shepp_logan(size))
}
