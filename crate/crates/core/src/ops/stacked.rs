use std::sync::Arc;

use super::map::LinearMap;
use crate::error::{Error, Result};

/// Vertical stack `[w₁A₁; w₂A₂; …]` of maps sharing a domain.
#[derive(Clone)]
pub struct StackedMap {
    blocks: Vec<(f64, Arc<dyn LinearMap>)>,
    offsets: Vec<usize>,
    domain: usize,
}

impl StackedMap {
    pub fn new(blocks: Vec<(f64, Arc<dyn LinearMap>)>) -> Result<Self> {
        let domain = blocks
            .first()
            .map(|(_, m)| m.domain_dim())
            .ok_or_else(|| Error::invalid("blocks", "at least one block is required"))?;
        let mut offsets = vec![0];
        for (w, m) in &blocks {
            if m.domain_dim() != domain {
                return Err(Error::SizeMismatch {
                    expected: domain,
                    actual: m.domain_dim(),
                    context: "stacked block domain",
                });
            }
            if !w.is_finite() {
                return Err(Error::invalid("weight", "block weights must be finite"));
            }
            offsets.push(offsets.last().unwrap() + m.range_dim());
        }
        Ok(Self {
            blocks,
            offsets,
            domain,
        })
    }

    pub fn blocks(&self) -> &[(f64, Arc<dyn LinearMap>)] {
        &self.blocks
    }

    /// Range of block `i` inside the stacked output.
    pub fn block_range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }
}

impl LinearMap for StackedMap {
    fn domain_dim(&self) -> usize {
        self.domain
    }

    fn range_dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, (w, m)) in self.blocks.iter().enumerate() {
            let seg = &mut out[self.block_range(i)];
            m.forward_into(x, seg);
            if *w != 1.0 {
                seg.iter_mut().for_each(|v| *v *= w);
            }
        }
    }

    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut tmp = vec![0.0; self.domain];
        for (i, (w, m)) in self.blocks.iter().enumerate() {
            m.adjoint_into(&y[self.block_range(i)], &mut tmp);
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o += w * t;
            }
        }
    }
}
