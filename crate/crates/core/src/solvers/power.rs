use super::metric::Metric;
use super::problem::SplitProblem;
use crate::error::Result;
use crate::ops::{dot, norm, LinearMap};
use crate::rng::Stream;

/// Rayleigh quotient after `n_iters` normalized power iterations from a
/// seeded Gaussian start. Returns 0 for the zero operator.
pub fn power_method(op: &dyn LinearMap, n_iters: usize, seed: u64) -> f64 {
    let dim = op.domain_dim();
    let mut stream = Stream::new(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| stream.standard_normal()).collect();
    let nv = norm(&v);
    if nv == 0.0 {
        return 0.0;
    }
    v.iter_mut().for_each(|x| *x /= nv);
    let mut w = vec![0.0; dim];
    for _ in 0..n_iters {
        op.forward_into(&v, &mut w);
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        for (a, b) in v.iter_mut().zip(&w) {
            *a = b / nw;
        }
    }
    op.forward_into(&v, &mut w);
    dot(&v, &w)
}

struct Preconditioned<'a> {
    problem: &'a SplitProblem,
    metric: &'a Metric,
    alpha: f64,
}

impl LinearMap for Preconditioned<'_> {
    fn domain_dim(&self) -> usize {
        self.problem.domain_dim()
    }

    fn range_dim(&self) -> usize {
        self.problem.domain_dim()
    }

    fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        let mut s = vec![0.0; x.len()];
        self.metric.apply_pinv_sqrt(x, &mut s).expect("metric supports square root");
        let mut ax = vec![0.0; self.problem.range_dim()];
        self.problem.apply(&s, &mut ax);
        self.problem.apply_adjoint(&ax, &mut s);
        self.metric.apply_pinv_sqrt(&s, out).expect("metric supports square root");
        out.iter_mut().for_each(|v| *v *= self.alpha);
    }

    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        self.forward_into(y, out)
    }
}

/// Estimate of `λ_max(α·M^{+1/2} AᵀA M^{+1/2})`. Values above 1 mean
/// `M ⪰ αAᵀA` fails on the range of `M`.
pub fn dominance_ratio(problem: &SplitProblem, metric: &Metric, alpha: f64, n_iters: usize, seed: u64) -> Result<f64> {
    if matches!(metric, Metric::ExactNormal { .. }) {
        return Err(crate::Error::invalid("metric", "dominance is trivial for the exact normal metric"));
    }
    let op = Preconditioned {
        problem,
        metric,
        alpha,
    };
    Ok(power_method(&op, n_iters, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circulant::{laplacian_mask_2d, CirculantOperator};
    use crate::ops::IdentityMap;

    struct Scaled(IdentityMap, f64);

    impl LinearMap for Scaled {
        fn domain_dim(&self) -> usize {
            self.0.domain_dim()
        }
        fn range_dim(&self) -> usize {
            self.0.range_dim()
        }
        fn forward_into(&self, x: &[f64], out: &mut [f64]) {
            for (o, v) in out.iter_mut().zip(x) {
                *o = self.1 * v;
            }
        }
        fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
            self.forward_into(y, out)
        }
    }

    #[test]
    fn scaled_identity() {
        let l = power_method(&Scaled(IdentityMap::new(10), 3.0), 5, 1);
        assert!((l - 3.0).abs() < 1e-10);
        assert_eq!(power_method(&Scaled(IdentityMap::new(10), 0.0), 5, 1), 0.0);
    }

    #[test]
    fn periodic_laplacian_maximum() {
        let op = CirculantOperator::new(laplacian_mask_2d(16));
        let l = power_method(&op, 500, 2);
        assert!((l - 8.0).abs() < 0.08, "{l}");
    }
}
