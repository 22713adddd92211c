//! Noisy measurements from a known image.
//!
//! Noise for bin `i` is drawn from its own substream `(seed, i)`, so the
//! result does not depend on evaluation order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Geometry;
use crate::ops::{ImageGrid, Sinogram};
use crate::rng::Stream;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NoiseKind {
    Gaussian { sigma: f64 },
    Poisson { exposure_scale: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub seed: u64,
}

impl NoiseKind {
    /// Parse `gaussian:SIGMA` or `poisson:SCALE`.
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, value) = text
            .split_once(':')
            .ok_or_else(|| Error::invalid("noise", format!("expected KIND:VALUE, got `{text}`")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::invalid("noise", format!("bad number `{value}`")))?;
        let kind = match kind {
            "gaussian" => NoiseKind::Gaussian { sigma: value },
            "poisson" => NoiseKind::Poisson { exposure_scale: value },
            other => return Err(Error::invalid("noise", format!("unknown kind `{other}`"))),
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseKind::Gaussian { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => {
                Err(Error::invalid("sigma", "must be nonnegative"))
            }
            NoiseKind::Poisson { exposure_scale } if !(exposure_scale > 0.0 && exposure_scale.is_finite()) => {
                Err(Error::invalid("exposure_scale", "must be positive"))
            }
            _ => Ok(()),
        }
    }
}

fn project(x: &ImageGrid, geometry: &Geometry) -> Result<Sinogram> {
    if x.size() != geometry.image_size() {
        return Err(Error::SizeMismatch {
            expected: geometry.image_size(),
            actual: x.size(),
            context: "image vs geometry",
        });
    }
    let (rows, cols) = geometry.shape();
    Sinogram::from_vec(rows, cols, geometry.map().forward(x.as_slice()))
}

/// `b = Ex + σ·ξ`, `ξᵢ` standard normal.
pub fn simulate_ct(x: &ImageGrid, geometry: &Geometry, sigma: f64, seed: u64) -> Result<Sinogram> {
    NoiseKind::Gaussian { sigma }.validate()?;
    let mut b = project(x, geometry)?;
    if sigma > 0.0 {
        for (i, v) in b.as_mut_slice().iter_mut().enumerate() {
            *v += sigma * Stream::substream(seed, i as u64).standard_normal();
        }
    }
    Ok(b)
}

/// `bᵢ ~ Poisson(s·(Ex)ᵢ)`.
pub fn simulate_pet(x: &ImageGrid, geometry: &Geometry, exposure_scale: f64, seed: u64) -> Result<Sinogram> {
    NoiseKind::Poisson { exposure_scale }.validate()?;
    if x.as_slice().iter().any(|&v| v < 0.0) {
        return Err(Error::invalid("image", "emission images must be nonnegative"));
    }
    let mut b = project(x, geometry)?;
    for (i, v) in b.as_mut_slice().iter_mut().enumerate() {
        let mean = exposure_scale * v.max(0.0);
        *v = if mean > 0.0 {
            Stream::substream(seed, i as u64).poisson(mean) as f64
        } else {
            0.0
        };
    }
    Ok(b)
}

pub fn simulate(x: &ImageGrid, geometry: &Geometry, noise: &NoiseSpec) -> Result<Sinogram> {
    match noise.kind {
        NoiseKind::Gaussian { sigma } => simulate_ct(x, geometry, sigma, noise.seed),
        NoiseKind::Poisson { exposure_scale } => simulate_pet(x, geometry, exposure_scale, noise.seed),
    }
}

/// `σ = fraction · max(Ex)`.
pub fn relative_sigma(x: &ImageGrid, geometry: &Geometry, fraction: f64) -> Result<f64> {
    let b = project(x, geometry)?;
    Ok(fraction * b.as_slice().iter().copied().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::shepp_logan;

    fn geom() -> Geometry {
        Geometry::parallel(16, 10, crate::ops::default_detectors(16)).unwrap()
    }

    #[test]
    fn zero_sigma_is_exact_projection() {
        let x = shepp_logan(16).unwrap();
        let b = simulate_ct(&x, &geom(), 0.0, 1).unwrap();
        assert_eq!(b.as_slice(), geom().map().forward(x.as_slice()).as_slice());
    }

    #[test]
    fn same_seed_same_data() {
        let x = shepp_logan(16).unwrap();
        let a = simulate_ct(&x, &geom(), 0.1, 9).unwrap();
        let b = simulate_ct(&x, &geom(), 0.1, 9).unwrap();
        let c = simulate_ct(&x, &geom(), 0.1, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn pet_rejects_negative_and_zero_image_is_zero() {
        let mut x = ImageGrid::zeros(16);
        let b = simulate_pet(&x, &geom(), 5.0, 1).unwrap();
        assert!(b.as_slice().iter().all(|&v| v == 0.0));
        x.set(3, 3, -1.0);
        assert!(simulate_pet(&x, &geom(), 5.0, 1).is_err());
    }

    #[test]
    fn noise_parsing() {
        assert_eq!(NoiseKind::parse("gaussian:0.5").unwrap(), NoiseKind::Gaussian { sigma: 0.5 });
        assert_eq!(
            NoiseKind::parse("poisson:2").unwrap(),
            NoiseKind::Poisson { exposure_scale: 2.0 }
        );
        assert!(NoiseKind::parse("poisson:0").is_err());
        assert!(NoiseKind::parse("uniform:1").is_err());
        assert!(NoiseKind::parse("gaussian").is_err());
    }
}
