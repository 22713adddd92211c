use std::sync::Arc;

/// A real linear operator with an exact adjoint.
///
/// `forward_into` and `adjoint_into` overwrite `out`; callers guarantee the
/// slice lengths match `domain_dim`/`range_dim`.
pub trait LinearMap: Send + Sync {
    fn domain_dim(&self) -> usize;
    fn range_dim(&self) -> usize;
    fn forward_into(&self, x: &[f64], out: &mut [f64]);
    fn adjoint_into(&self, y: &[f64], out: &mut [f64]);

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.range_dim()];
        self.forward_into(x, &mut out);
        out
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.domain_dim()];
        self.adjoint_into(y, &mut out);
        out
    }
}

impl<T: LinearMap + ?Sized> LinearMap for Arc<T> {
    fn domain_dim(&self) -> usize {
        (**self).domain_dim()
    }
    fn range_dim(&self) -> usize {
        (**self).range_dim()
    }
    fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        (**self).forward_into(x, out)
    }
    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        (**self).adjoint_into(y, out)
    }
}

impl<T: LinearMap + ?Sized> LinearMap for &T {
    fn domain_dim(&self) -> usize {
        (**self).domain_dim()
    }
    fn range_dim(&self) -> usize {
        (**self).range_dim()
    }
    fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        (**self).forward_into(x, out)
    }
    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        (**self).adjoint_into(y, out)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IdentityMap {
    dim: usize,
}

impl IdentityMap {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl LinearMap for IdentityMap {
    fn domain_dim(&self) -> usize {
        self.dim
    }
    fn range_dim(&self) -> usize {
        self.dim
    }
    fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }
    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        out.copy_from_slice(y);
    }
}

/// The normal operator `AᵀA` of a map `A`; self-adjoint.
pub struct NormalMap<M> {
    inner: M,
}

impl<M: LinearMap> NormalMap<M> {
    pub fn new(inner: M) -> Self {
        Self { inner }
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }
}

impl<M: LinearMap> LinearMap for NormalMap<M> {
    fn domain_dim(&self) -> usize {
        self.inner.domain_dim()
    }
    fn range_dim(&self) -> usize {
        self.inner.domain_dim()
    }
    fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        let y = self.inner.forward(x);
        self.inner.adjoint_into(&y, out);
    }
    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        self.forward_into(y, out);
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
