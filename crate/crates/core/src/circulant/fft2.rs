use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Square 2D FFT: rows, then columns through a transpose.
#[derive(Clone)]
pub struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn pass(&self, fft: &dyn Fft<f64>, data: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(data.len(), n * n);
        if n == 0 {
            return;
        }
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
        fft.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
    }

    /// Unnormalized forward transform, in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.pass(self.fwd.as_ref(), data);
    }

    /// Inverse transform including the `1/N²` factor, in place.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.pass(self.inv.as_ref(), data);
        let scale = 1.0 / (self.n * self.n) as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }

    pub fn forward_real(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}
