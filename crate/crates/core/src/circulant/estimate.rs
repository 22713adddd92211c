//! Fitting circulant masks to a normal operator from random probes.
//!
//! For a circulant `C = F⁻¹ diag(h) F`, `(F C v)_i / (F v)_i = h_i` for any
//! probe `v`, so averaging that ratio over probes estimates a mask for an
//! operator that is only approximately circulant.

use rustfft::num_complex::Complex64;

use super::fft2::Fft2;
use super::mask::SpectralMask;
use crate::error::{Error, Result};
use crate::ops::LinearMap;
use crate::rng::Stream;

/// Probe bins with `|Fv|_i < RATIO_FLOOR·‖Fv‖` are skipped.
const RATIO_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct EmpiricalMask {
    pub mask: SpectralMask,
    /// Frequencies `(j, k)` that no probe could resolve; set to zero.
    pub skipped_bins: Vec<(usize, usize)>,
}

fn image_side(op: &dyn LinearMap) -> Result<usize> {
    let dim = op.domain_dim();
    if op.range_dim() != dim {
        return Err(Error::invalid("normal_op", "must map images to images"));
    }
    let n = (dim as f64).sqrt().round() as usize;
    if n * n != dim {
        return Err(Error::invalid("normal_op", format!("domain {dim} is not a square image")));
    }
    Ok(n)
}

fn gaussian_probe(stream: &mut Stream, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| stream.standard_normal()).collect()
}

/// Averages `(F·normal_op(v))_i / (Fv)_i` over `n_samples` standard-normal
/// probes drawn from `seed`.
pub fn empirical_mask(normal_op: &dyn LinearMap, n_samples: usize, rng_seed: u64) -> Result<EmpiricalMask> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "at least one probe is required"));
    }
    let n = image_side(normal_op)?;
    let dim = n * n;
    let fft = Fft2::new(n);
    let mut stream = Stream::new(rng_seed);
    let mut sum = vec![Complex64::default(); dim];
    let mut count = vec![0usize; dim];
    for _ in 0..n_samples {
        let v = gaussian_probe(&mut stream, dim);
        let fv = fft.forward_real(&v);
        let fav = fft.forward_real(&normal_op.forward(&v));
        let floor = RATIO_FLOOR * fv.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for i in 0..dim {
            if fv[i].norm() >= floor && fv[i].norm() > 0.0 {
                sum[i] += fav[i] / fv[i];
                count[i] += 1;
            }
        }
    }
    let mut skipped_bins = Vec::new();
    let values = sum
        .into_iter()
        .zip(&count)
        .enumerate()
        .map(|(i, (s, &c))| {
            if c == 0 {
                skipped_bins.push((i / n, i % n));
                Complex64::default()
            } else {
                s / c as f64
            }
        })
        .collect();
    if !skipped_bins.is_empty() {
        log::warn!("empirical mask: {} frequency bins never resolved", skipped_bins.len());
    }
    Ok(EmpiricalMask {
        mask: SpectralMask::new(n, values)?,
        skipped_bins,
    })
}

/// Least-squares scale `c` minimizing `Σ ‖F·normal_op(v) - c·(template ⊙ Fv)‖²`
/// over probes, DC bin excluded.
pub fn calibrate_scale(
    normal_op: &dyn LinearMap,
    template: &SpectralMask,
    n_samples: usize,
    rng_seed: u64,
) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "at least one probe is required"));
    }
    let n = image_side(normal_op)?;
    if template.size() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: template.size(),
            context: "template mask size",
        });
    }
    if template.values()[1..].iter().all(|c| c.norm() == 0.0) {
        return Err(Error::ZeroTemplate);
    }
    let fft = Fft2::new(n);
    let mut stream = Stream::new(rng_seed);
    let (mut num, mut den) = (0.0, 0.0);
    for _ in 0..n_samples {
        let v = gaussian_probe(&mut stream, n * n);
        let fv = fft.forward_real(&v);
        let fav = fft.forward_real(&normal_op.forward(&v));
        for i in 1..n * n {
            let model = template.values()[i] * fv[i];
            num += (model.conj() * fav[i]).re;
            den += model.norm_sqr();
        }
    }
    if den == 0.0 {
        return Err(Error::ZeroTemplate);
    }
    Ok(num / den)
}
