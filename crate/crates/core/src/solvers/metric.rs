use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex64;

use super::problem::{SolverConfig, SplitProblem};
use crate::circulant::{pinv_mask, CirculantOperator, SpectralMask};
use crate::error::{Error, Result};
use crate::ops::{dot, LinearMap};

/// The primal metric `M` of the splitting.
#[derive(Clone, Debug)]
pub enum Metric {
    /// `M = γI` (PDHG).
    ScaledIdentity { gamma: f64 },
    /// `M = F⁻¹ diag(γ + α·h_C) F`.
    Circulant {
        metric: CirculantOperator,
        pinv: CirculantOperator,
        pinv_sqrt: CirculantOperator,
    },
    /// Explicit symmetric `M` with its pseudoinverse.
    Dense {
        metric: DMatrix<f64>,
        pinv: DMatrix<f64>,
    },
    /// `M = αAᵀA`, applied through the problem operator. Has no cheap
    /// pseudoinverse; used to evaluate the seminorm of ADMM iterates.
    ExactNormal { alpha: f64 },
}

impl Metric {
    pub fn from_config(config: &SolverConfig, domain_dim: usize) -> Result<Self> {
        config.validate()?;
        match &config.mask {
            None => Ok(Metric::ScaledIdentity { gamma: config.gamma }),
            Some(mask) => {
                if mask.size() * mask.size() != domain_dim {
                    return Err(Error::SizeMismatch {
                        expected: domain_dim,
                        actual: mask.size() * mask.size(),
                        context: "circulant mask vs problem domain",
                    });
                }
                let m = mask.scaled(config.alpha).add_constant(config.gamma);
                Self::circulant(m, config.pinv_rel_tol)
            }
        }
    }

    /// Circulant metric from the full mask of `M`.
    pub fn circulant(metric_mask: SpectralMask, rel_tol: f64) -> Result<Self> {
        let pinv = pinv_mask(&metric_mask, rel_tol)?;
        let sqrt_values = pinv
            .values()
            .iter()
            .map(|c| Complex64::new(c.re.max(0.0).sqrt(), 0.0))
            .collect();
        let pinv_sqrt = SpectralMask::new(metric_mask.size(), sqrt_values)?;
        Ok(Metric::Circulant {
            metric: CirculantOperator::new(metric_mask),
            pinv: CirculantOperator::new(pinv),
            pinv_sqrt: CirculantOperator::new(pinv_sqrt),
        })
    }

    /// Dense metric; the pseudoinverse uses an SVD cutoff of
    /// `rel_tol·σ_max`.
    pub fn dense(metric: DMatrix<f64>, rel_tol: f64) -> Self {
        let pinv = crate::ops::DenseMap::new(metric.clone()).pinv(rel_tol);
        Metric::Dense { metric, pinv }
    }

    pub fn apply_pinv(&self, g: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            Metric::ScaledIdentity { gamma } => {
                for (o, v) in out.iter_mut().zip(g) {
                    *o = v / gamma;
                }
            }
            Metric::Circulant { pinv, .. } => pinv.forward_into(g, out),
            Metric::Dense { pinv, .. } => {
                let y = pinv * DVector::from_column_slice(g);
                out.copy_from_slice(y.as_slice());
            }
            Metric::ExactNormal { .. } => {
                return Err(Error::invalid("metric", "exact normal metric has no explicit pseudoinverse"))
            }
        }
        Ok(())
    }

    /// `M^{+1/2}`, for dominance checks.
    pub(crate) fn apply_pinv_sqrt(&self, g: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            Metric::ScaledIdentity { gamma } => {
                let s = gamma.sqrt();
                for (o, v) in out.iter_mut().zip(g) {
                    *o = v / s;
                }
            }
            Metric::Circulant { pinv_sqrt, .. } => pinv_sqrt.forward_into(g, out),
            Metric::Dense { pinv, .. } => {
                let eig = pinv.clone().symmetric_eigen();
                let sq = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
                let root = &eig.eigenvectors * DMatrix::from_diagonal(&sq) * eig.eigenvectors.transpose();
                let y = root * DVector::from_column_slice(g);
                out.copy_from_slice(y.as_slice());
            }
            Metric::ExactNormal { .. } => {
                return Err(Error::invalid("metric", "exact normal metric has no explicit square root"))
            }
        }
        Ok(())
    }

    /// `⟨dx, M dx⟩`.
    pub fn quad_form(&self, dx: &[f64], problem: &SplitProblem) -> f64 {
        match self {
            Metric::ScaledIdentity { gamma } => gamma * dot(dx, dx),
            Metric::Circulant { metric, .. } => dot(dx, &metric.forward(dx)),
            Metric::Dense { metric, .. } => {
                let v = DVector::from_column_slice(dx);
                v.dot(&(metric * &v))
            }
            Metric::ExactNormal { alpha } => {
                let mut a = vec![0.0; problem.range_dim()];
                problem.apply(dx, &mut a);
                alpha * dot(&a, &a)
            }
        }
    }
}
