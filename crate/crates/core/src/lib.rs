//! Near-circulant splitting (NCS) for tomographic reconstruction.
//!
//! The crate solves problems of the form `minimize g(Ax - b)` where `AᵀA` is
//! close to, but not exactly, circulant. NCS replaces the exact `(AᵀA)⁺`
//! step of ADMM with the pseudoinverse of a circulant metric
//! `M = γI + αC`, which costs two FFTs per iteration. PDHG and ADMM with an
//! inner conjugate-gradient loop are included as baselines.
//!
//! Module map:
//!
//! - [`circulant`]: spectral masks, the 2D DFT, mask formulas and estimation.
//! - [`ops`]: linear operators (parallel-beam Radon, fan-beam, finite
//!   differences, stacking, dense matrices).
//! - [`prox`]: proximal operators of the conjugate functions used by the
//!   dual updates.
//! - [`solvers`]: NCS, PDHG, ADMM-CG, convergence records, the D-seminorm
//!   and the rate bound.
//! - [`models`]: builders for TV-regularized CT and PET problems.
//! - [`bench`](mod@bench): reproducible solver comparisons against a shared reference.
//! - [`phantom`], [`simulate`], [`io`]: test images, measurement simulation
//!   and file formats.
//! - [`cli`]: the `ncs` command-line front end.

pub mod bench;
pub mod circulant;
pub mod cli;
pub mod error;
pub mod io;
pub mod models;
pub mod ops;
pub mod phantom;
pub mod rng;
pub mod prox;
pub mod simulate;
pub mod solvers;

pub use error::{Error, Result};
