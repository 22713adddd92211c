//! Proximal operators of conjugate functions.
//!
//! Each [`ProxConj`] evaluates `prox_{αg*}` for one separable `g`, together
//! with the primal prox `prox_{tg}` it is paired with through Moreau's
//! identity `prox_{αg*}(z) = z - α·prox_{g/α}(z/α)`.

/// `prox_{αg*}` for a separable convex `g`.
pub trait ProxConj: Send + Sync {
    /// `out = prox_{αg*}(z)`.
    fn prox_conj(&self, z: &[f64], alpha: f64, out: &mut [f64]);

    /// `out = prox_{t·g}(w)`.
    fn prox_primal(&self, w: &[f64], t: f64, out: &mut [f64]);

    /// `g(y)`; indicator terms are treated as constraints and contribute 0.
    fn objective(&self, y: &[f64]) -> f64;

    /// Stable description including parameters, used for fingerprints.
    fn descriptor(&self) -> String;
}

/// `z / (1 + α)`: the conjugate prox of `½‖·‖²`.
pub fn prox_conj_quadratic(z: f64, alpha: f64) -> f64 {
    z / (1.0 + alpha)
}

/// Clamp to `[-s, s]`.
pub fn project_box(z: f64, s: f64) -> f64 {
    z.clamp(-s, s)
}

/// `S(u; c) = 1 + (u - 1 - sqrt((u-1)² + 4c)) / 2`, the conjugate prox of the
/// Poisson negative log-likelihood with `c = α·b`. Returns `None` for `c < 0`.
pub fn prox_conj_poisson(u: f64, c: f64) -> Option<f64> {
    if !(c >= 0.0) {
        return None;
    }
    let d = u - 1.0;
    if c == 0.0 {
        // sqrt(d²) = |d|; keep the exact min(u, 1).
        return Some(u.min(1.0));
    }
    let root = (d * d + 4.0 * c).sqrt();
    if d <= 0.0 {
        Some(1.0 + (d - root) / 2.0)
    } else {
        // d - root = -4c/(d + root), without cancellation.
        Some(1.0 - 2.0 * c / (d + root))
    }
}

/// Projection onto the nonpositive orthant: conjugate prox of `δ_{R₊}`.
pub fn prox_conj_nonneg(u: f64) -> f64 {
    u.min(0.0)
}

/// Moreau's identity: `z - α·prox_g(z/α)` where `prox_g` evaluates
/// `prox_{g/α}`.
pub fn moreau_conj(prox_g: impl Fn(f64) -> f64, z: f64, alpha: f64) -> f64 {
    z - alpha * prox_g(z / alpha)
}

/// `g(y) = ½‖y‖²`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Quadratic;

impl ProxConj for Quadratic {
    fn prox_conj(&self, z: &[f64], alpha: f64, out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(z) {
            *o = prox_conj_quadratic(v, alpha);
        }
    }

    fn prox_primal(&self, w: &[f64], t: f64, out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(w) {
            *o = v / (1.0 + t);
        }
    }

    fn objective(&self, y: &[f64]) -> f64 {
        0.5 * y.iter().map(|v| v * v).sum::<f64>()
    }

    fn descriptor(&self) -> String {
        "quadratic".into()
    }
}

/// `g(y) = τ‖y‖₁`; its conjugate prox is the clamp to `[-τ, τ]` for every α.
#[derive(Clone, Copy, Debug)]
pub struct L1Norm {
    pub scale: f64,
}

impl L1Norm {
    pub fn new(scale: f64) -> Self {
        Self { scale }
    }
}

impl ProxConj for L1Norm {
    fn prox_conj(&self, z: &[f64], _alpha: f64, out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(z) {
            *o = project_box(v, self.scale);
        }
    }

    fn prox_primal(&self, w: &[f64], t: f64, out: &mut [f64]) {
        let thr = t * self.scale;
        for (o, &v) in out.iter_mut().zip(w) {
            *o = v.signum() * (v.abs() - thr).max(0.0);
        }
    }

    fn objective(&self, y: &[f64]) -> f64 {
        self.scale * y.iter().map(|v| v.abs()).sum::<f64>()
    }

    fn descriptor(&self) -> String {
        format!("l1:{:016x}", self.scale.to_bits())
    }
}

/// `g(y) = Σ ℓ(y_i; b_i)` with `ℓ(y; b) = y - b·log y` (`b > 0`) and
/// `y + δ_{R₊}(y)` (`b = 0`).
#[derive(Clone, Debug)]
pub struct PoissonLogLik {
    counts: Vec<f64>,
}

impl PoissonLogLik {
    /// Counts must be finite and nonnegative.
    pub fn new(counts: Vec<f64>) -> crate::Result<Self> {
        if counts.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(crate::Error::invalid("counts", "must be finite and nonnegative"));
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }
}

impl ProxConj for PoissonLogLik {
    fn prox_conj(&self, z: &[f64], alpha: f64, out: &mut [f64]) {
        for ((o, &v), &b) in out.iter_mut().zip(z).zip(&self.counts) {
            *o = prox_conj_poisson(v, alpha * b).expect("counts are nonnegative");
        }
    }

    fn prox_primal(&self, w: &[f64], t: f64, out: &mut [f64]) {
        // Positive root of y² - (w - t)y - tb = 0; max(w - t, 0) when b = 0.
        for ((o, &v), &b) in out.iter_mut().zip(w).zip(&self.counts) {
            let p = v - t;
            *o = if b == 0.0 {
                p.max(0.0)
            } else {
                let root = (p * p + 4.0 * t * b).sqrt();
                if p >= 0.0 {
                    (p + root) / 2.0
                } else {
                    2.0 * t * b / (root - p)
                }
            };
        }
    }

    fn objective(&self, y: &[f64]) -> f64 {
        y.iter()
            .zip(&self.counts)
            .map(|(&y, &b)| {
                if b > 0.0 {
                    if y > 0.0 {
                        y - b * y.ln()
                    } else {
                        f64::INFINITY
                    }
                } else if y >= 0.0 {
                    y
                } else {
                    f64::INFINITY
                }
            })
            .sum()
    }

    fn descriptor(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for c in &self.counts {
            h.update(c.to_le_bytes());
        }
        format!("poisson:{}", hex::encode(h.finalize()))
    }
}

/// `g = δ_{R₊}`: positivity constraint.
#[derive(Clone, Copy, Debug, Default)]
pub struct NonNegative;

impl ProxConj for NonNegative {
    fn prox_conj(&self, z: &[f64], _alpha: f64, out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(z) {
            *o = prox_conj_nonneg(v);
        }
    }

    fn prox_primal(&self, w: &[f64], _t: f64, out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(w) {
            *o = v.max(0.0);
        }
    }

    fn objective(&self, _y: &[f64]) -> f64 {
        0.0
    }

    fn descriptor(&self) -> String {
        "nonneg".into()
    }
}
