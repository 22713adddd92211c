//! Rasterize the Shepp–Logan phantom, simulate CT and PET measurements and
//! write everything (with PGM previews) to a directory.
//!
//! cargo run --release --example phantom_simulate -- [OUT_DIR]

use std::path::PathBuf;

use ncs::io::{self, SinogramFile};
use ncs::models::Geometry;
use ncs::ops::default_detectors;
use ncs::phantom::shepp_logan;
use ncs::simulate::{relative_sigma, simulate, NoiseKind, NoiseSpec};

fn main() -> ncs::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ncs-examples"));
    std::fs::create_dir_all(&dir).expect("output directory");

    let n = 64;
    let truth = shepp_logan(n)?;
    io::write_image(&dir.join("phantom.f64"), &truth)?;
    io::write_pgm(&dir.join("phantom.pgm"), &truth)?;

    let geometry = Geometry::parallel(n, 60, default_detectors(n))?;
    let sigma = relative_sigma(&truth, &geometry, 0.005)?;
    for (name, kind) in [
        ("ct", NoiseKind::Gaussian { sigma }),
        ("pet", NoiseKind::Poisson { exposure_scale: 1.0 }),
    ] {
        let noise = NoiseSpec { kind, seed: 7 };
        let sinogram = simulate(&truth, &geometry, &noise)?;
        let (rows, cols) = sinogram.shape();
        let total: f64 = sinogram.as_slice().iter().sum();
        println!("{name}: {rows}×{cols} sinogram, total {total:.1}");
        io::write_sinogram(
            &dir.join(format!("{name}_sino.f64")),
            &SinogramFile { sinogram, geometry: Some(geometry.spec()), noise: Some(noise) },
        )?;
    }
    println!("CT noise sigma {sigma:.4e}; files in {}", dir.display());
    Ok(())
}
