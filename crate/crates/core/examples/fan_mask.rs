//! Fan-beam geometry has no closed-form mask; fit one empirically and see
//! how the fit improves with the number of probes.
//!
//! cargo run --release --example fan_mask

use ncs::circulant::{apply_circulant, empirical_mask};
use ncs::models::symmetrize_mask;
use ncs::ops::{default_detectors, default_fan_angle, FanBeam, LinearMap, NormalMap};
use ncs::phantom::shepp_logan;

fn main() -> ncs::Result<()> {
    let n = 48;
    let radius = 1.5 * n as f64;
    let beam = FanBeam::new(n, 72, default_detectors(n), radius, default_fan_angle(n, radius))?;
    let normal = NormalMap::new(&beam);
    let x = shepp_logan(n)?;
    let exact = normal.forward(x.as_slice());
    let norm: f64 = exact.iter().map(|v| v * v).sum::<f64>().sqrt();
    for samples in [1, 3, 10, 30] {
        let est = empirical_mask(&normal, samples, 11)?;
        let mask = symmetrize_mask(&est.mask);
        let approx = apply_circulant(&mask, &x)?;
        let err: f64 = approx.as_slice().iter().zip(&exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        println!(
            "{samples:>3} probes: relative error {:.3e}, {} unresolved bins",
            err / norm,
            est.skipped_bins.len()
        );
    }
    Ok(())
}
