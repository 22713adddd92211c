//! Circulant approximations of normal operators, applied through the 2D DFT.
//!
//! Convention: the forward DFT is unnormalized and the inverse carries the
//! `1/N²` factor, so a circulant `C = F⁻¹ diag(h) F` has eigenvalues `h`
//! indexed by frequency `(row, col)`.

mod estimate;
mod fft2;
mod mask;

pub use estimate::{calibrate_scale, empirical_mask, EmpiricalMask};
pub use fft2::Fft2;
pub use mask::{
    apply_circulant, laplacian_mask_2d, pinv_mask, radon_mask, CirculantOperator, SpectralMask,
    DEFAULT_PINV_REL_TOL,
};
