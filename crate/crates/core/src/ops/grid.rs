use crate::error::{check_len, Error, Result};

/// Square `N×N` real image, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageGrid {
    n: usize,
    data: Vec<f64>,
}

impl ImageGrid {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self {
            n,
            data: vec![value; n * n],
        }
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        check_len(n * n, data.len(), "image data")?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("image", "contains non-finite values"));
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.n + col] = value;
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Parallel-beam measurement array: angle `t` is `tπ/n_angles`, detector
/// `d` sits at offset `d - (n_detectors-1)/2` from the image center.
#[derive(Clone, Debug, PartialEq)]
pub struct Sinogram {
    n_angles: usize,
    n_detectors: usize,
    data: Vec<f64>,
}

impl Sinogram {
    pub fn zeros(n_angles: usize, n_detectors: usize) -> Self {
        Self {
            n_angles,
            n_detectors,
            data: vec![0.0; n_angles * n_detectors],
        }
    }

    pub fn from_vec(n_angles: usize, n_detectors: usize, data: Vec<f64>) -> Result<Self> {
        check_len(n_angles * n_detectors, data.len(), "sinogram data")?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sinogram", "contains non-finite values"));
        }
        Ok(Self {
            n_angles,
            n_detectors,
            data,
        })
    }

    pub fn n_angles(&self) -> usize {
        self.n_angles
    }

    pub fn n_detectors(&self) -> usize {
        self.n_detectors
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_angles, self.n_detectors)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, angle: usize) -> &[f64] {
        &self.data[angle * self.n_detectors..(angle + 1) * self.n_detectors]
    }
}

/// First differences of an `N×N` image: `N×(N-1)` horizontal differences
/// followed by `(N-1)×N` vertical differences.
#[derive(Clone, Debug, PartialEq)]
pub struct GradField {
    n: usize,
    data: Vec<f64>,
}

impl GradField {
    pub fn len_for(n: usize) -> usize {
        2 * n * n.saturating_sub(1)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; Self::len_for(n)],
        }
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        check_len(Self::len_for(n), data.len(), "gradient field")?;
        Ok(Self { n, data })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn horizontal(&self) -> &[f64] {
        &self.data[..self.n * self.n.saturating_sub(1)]
    }

    pub fn vertical(&self) -> &[f64] {
        &self.data[self.n * self.n.saturating_sub(1)..]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}
