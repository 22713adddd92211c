//! Spectral masks: the closed-form Laplacian and parallel-beam masks, an
//! empirical fit of RᵀR, and how well each circulant explains the true
//! normal operator.
//!
//! cargo run --release --example circulant_masks

use ncs::circulant::{apply_circulant, empirical_mask, laplacian_mask_2d, pinv_mask, radon_mask, SpectralMask};
use ncs::models::{parallel_data_mask, symmetrize_mask};
use ncs::ops::{default_detectors, FiniteDifference, ImageGrid, LinearMap, NormalMap, ParallelBeam};
use ncs::phantom::shepp_logan;

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn report(name: &str, mask: &SpectralMask, op: &dyn LinearMap, x: &ImageGrid) -> ncs::Result<()> {
    let exact = op.forward(x.as_slice());
    let approx = apply_circulant(mask, x)?;
    println!("{name:>22}: relative error on the phantom {:.3e}", rel_err(approx.as_slice(), &exact));
    Ok(())
}

fn main() -> ncs::Result<()> {
    let n = 64;
    let x = shepp_logan(n)?;

    // DᵀD with periodic boundaries is exactly circulant. The Neumann
    // operator differs only along the border, where the phantom is zero.
    let lap = laplacian_mask_2d(n);
    report("laplacian", &lap, &NormalMap::new(FiniteDifference::new(n)), &x)?;

    let beam = ParallelBeam::new(n, 60, default_detectors(n))?;
    let normal = NormalMap::new(&beam);
    let empirical = symmetrize_mask(&empirical_mask(&normal, 10, 1)?.mask);
    report("empirical (10 probes)", &empirical, &normal, &x)?;

    // The closed form leaves the DC entry free; borrow it from the fit.
    let dc = empirical.get(0, 0).re;
    report("radon, calibrated", &parallel_data_mask(&beam, dc, 10, 1)?, &normal, &x)?;
    let unit = radon_mask(n, 1.0, dc)?;
    report("radon, unit scale", &unit, &normal, &x)?;

    // The pseudoinverse inverts the mask on its support and zeroes the rest.
    let pinv = pinv_mask(&lap, 1e-12)?;
    let zero_bins = pinv.values().iter().filter(|v| v.norm() == 0.0).count();
    println!("laplacian pseudoinverse: {zero_bins} bin(s) outside the support");
    Ok(())
}
