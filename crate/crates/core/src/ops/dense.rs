use nalgebra::{DMatrix, DVector};

use super::map::LinearMap;

/// Explicit dense matrix; used as an oracle for small problems.
#[derive(Clone, Debug)]
pub struct DenseMap {
    matrix: DMatrix<f64>,
}

impl DenseMap {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    /// Row-major `rows×cols` data.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Self {
        Self::new(DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Moore–Penrose pseudoinverse via SVD; singular values at or below
    /// `rel_tol·σ_max` are treated as zero.
    pub fn pinv(&self, rel_tol: f64) -> DMatrix<f64> {
        pinv(&self.matrix, rel_tol)
    }

    /// `(AᵀA)⁺`.
    pub fn normal_pinv(&self, rel_tol: f64) -> DMatrix<f64> {
        pinv(&(self.matrix.transpose() * &self.matrix), rel_tol)
    }
}

pub(crate) fn pinv(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = rel_tol * smax;
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let mut out = DMatrix::zeros(m.ncols(), m.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > eps && s > 0.0 {
            out += (vt.row(k).transpose() * u.column(k).transpose()) / s;
        }
    }
    out
}

impl LinearMap for DenseMap {
    fn domain_dim(&self) -> usize {
        self.matrix.ncols()
    }

    fn range_dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        let y = &self.matrix * DVector::from_column_slice(x);
        out.copy_from_slice(y.as_slice());
    }

    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        let x = self.matrix.tr_mul(&DVector::from_column_slice(y));
        out.copy_from_slice(x.as_slice());
    }
}

/// Dense matrix of any map, built column by column from unit vectors.
pub fn materialize(map: &dyn LinearMap) -> DMatrix<f64> {
    let (m, n) = (map.range_dim(), map.domain_dim());
    let mut out = DMatrix::zeros(m, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; m];
    for j in 0..n {
        e[j] = 1.0;
        map.forward_into(&e, &mut col);
        out.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    out
}
