//! Seeded random streams with pinned sampling algorithms.
//!
//! All draws come from ChaCha8 seeded with `seed_from_u64`. Uniforms take the
//! top 53 bits of `next_u64`. Normals use the cosine branch of Box–Muller
//! (two uniforms per normal). Poisson counts use sequential inversion for
//! means below 10 and Hörmann's PTRS transformed rejection otherwise. Fixing
//! the algorithms keeps a `(seed, stream)` pair reproducible across builds.

use std::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Means at or above this use transformed rejection.
pub const POISSON_INVERSION_LIMIT: f64 = 10.0;

pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent sub-stream `index` of `seed` (counter-based; used per
    /// measurement bin so generation order does not matter).
    pub fn substream(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self { rng }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`.
    fn uniform_open0(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform_open0();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }

    pub fn poisson(&mut self, mean: f64) -> u64 {
        if !(mean > 0.0) {
            return 0;
        }
        if mean < POISSON_INVERSION_LIMIT {
            self.poisson_inversion(mean)
        } else {
            self.poisson_ptrs(mean)
        }
    }

    fn poisson_inversion(&mut self, mean: f64) -> u64 {
        let u = self.uniform();
        let mut k = 0u64;
        let mut p = (-mean).exp();
        let mut cdf = p;
        while u >= cdf {
            k += 1;
            p *= mean / k as f64;
            let next = cdf + p;
            if next == cdf {
                break;
            }
            cdf = next;
        }
        k
    }

    // Hörmann (1993), "The transformed rejection method for generating
    // Poisson random variables".
    fn poisson_ptrs(&mut self, mean: f64) -> u64 {
        let slam = mean.sqrt();
        let loglam = mean.ln();
        let b = 0.931 + 2.53 * slam;
        let a = -0.059 + 0.02483 * b;
        let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        let vr = 0.9277 - 3.6224 / (b - 2.0);
        loop {
            let u = self.uniform() - 0.5;
            let v = self.uniform();
            let us = 0.5 - u.abs();
            let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
            if us >= 0.07 && v <= vr {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
            let rhs = -mean + k * loglam - ln_factorial(k);
            if lhs <= rhs {
                return k as u64;
            }
        }
    }
}

fn ln_factorial(k: f64) -> f64 {
    if k < 20.0 {
        (1..=k as u64).map(|i| (i as f64).ln()).sum()
    } else {
        // Stirling series.
        let x = k + 1.0;
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
            + 1.0 / (1260.0 * x.powi(5))
    }
}
