use super::grid::{GradField, ImageGrid};
use super::map::LinearMap;

/// 2D forward differences with Neumann boundaries: `(Dx)_ij = x_ij - x_i(j+1)`
/// horizontally and `x_ij - x_(i+1)j` vertically.
#[derive(Clone, Copy, Debug)]
pub struct FiniteDifference {
    n: usize,
}

impl FiniteDifference {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn image_size(&self) -> usize {
        self.n
    }
}

impl LinearMap for FiniteDifference {
    fn domain_dim(&self) -> usize {
        self.n * self.n
    }

    fn range_dim(&self) -> usize {
        GradField::len_for(self.n)
    }

    fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        if n < 2 {
            return;
        }
        let (h, v) = out.split_at_mut(n * (n - 1));
        for i in 0..n {
            let row = &x[i * n..(i + 1) * n];
            let hrow = &mut h[i * (n - 1)..(i + 1) * (n - 1)];
            for j in 0..n - 1 {
                hrow[j] = row[j] - row[j + 1];
            }
        }
        for i in 0..n - 1 {
            for j in 0..n {
                v[i * n + j] = x[i * n + j] - x[(i + 1) * n + j];
            }
        }
    }

    fn adjoint_into(&self, g: &[f64], out: &mut [f64]) {
        let n = self.n;
        out.iter_mut().for_each(|o| *o = 0.0);
        if n < 2 {
            return;
        }
        let (h, v) = g.split_at(n * (n - 1));
        for i in 0..n {
            for j in 0..n - 1 {
                let d = h[i * (n - 1) + j];
                out[i * n + j] += d;
                out[i * n + j + 1] -= d;
            }
        }
        for i in 0..n - 1 {
            for j in 0..n {
                let d = v[i * n + j];
                out[i * n + j] += d;
                out[(i + 1) * n + j] -= d;
            }
        }
    }
}

pub fn grad_forward(x: &ImageGrid) -> GradField {
    let op = FiniteDifference::new(x.size());
    GradField::from_vec(x.size(), op.forward(x.as_slice())).expect("gradient length")
}

/// Negative divergence; the exact transpose of [`grad_forward`].
pub fn grad_adjoint(g: &GradField) -> ImageGrid {
    let op = FiniteDifference::new(g.size());
    let data = op.adjoint(g.as_slice());
    ImageGrid::from_vec(g.size(), data).expect("finite adjoint")
}
