use crate::ops::{dot, LinearMap};

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    /// Iterations actually performed.
    pub iterations: usize,
    /// Stopped on a direction with nonpositive curvature.
    pub breakdown: bool,
}

/// Unpreconditioned conjugate gradient on a symmetric PSD `op`, from zero,
/// for at most `n_iters` steps. Stops early on an exactly zero residual or a
/// curvature breakdown.
pub fn cg(op: &dyn LinearMap, rhs: &[f64], n_iters: usize) -> CgOutcome {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut rs = dot(&r, &r);
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    let mut breakdown = false;
    for _ in 0..n_iters {
        if rs == 0.0 {
            break;
        }
        op.forward_into(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            breakdown = true;
            break;
        }
        let step = rs / curvature;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let rs_next = dot(&r, &r);
        let beta = rs_next / rs;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rs = rs_next;
        iterations += 1;
    }
    CgOutcome {
        x,
        iterations,
        breakdown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::IdentityMap;

    #[test]
    fn identity_converges_in_one_step() {
        let b = vec![1.0, -2.0, 0.5];
        let out = cg(&IdentityMap::new(3), &b, 10);
        assert_eq!(out.x, b);
        assert_eq!(out.iterations, 1);
        assert!(!out.breakdown);
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let out = cg(&IdentityMap::new(4), &[0.0; 4], 5);
        assert_eq!(out.x, vec![0.0; 4]);
        assert_eq!(out.iterations, 0);
    }
}
