//! Linear forward/adjoint operators.
//!
//! Every operator implements [`LinearMap`] on flat `f64` slices. Images are
//! row-major `N×N`, sinograms are `n_angles × n_detectors` (angle-major).
//! Each adjoint is the exact transpose of its forward map.

mod dense;
mod fanbeam;
mod gradient;
mod grid;
mod map;
mod radon;
mod sparse;
mod stacked;

pub use dense::{materialize, DenseMap};
pub use fanbeam::{build_fanbeam, default_fan_angle, FanBeam};
pub use gradient::{grad_adjoint, grad_forward, FiniteDifference};
pub use grid::{GradField, ImageGrid, Sinogram};
pub use map::{dot, norm, IdentityMap, LinearMap, NormalMap};
pub use radon::{
    default_detectors, min_detectors, radon_adjoint, radon_forward, ParallelBeam,
};
pub use sparse::CsrMatrix;
pub use stacked::StackedMap;
