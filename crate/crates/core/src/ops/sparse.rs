use rayon::prelude::*;

use super::map::LinearMap;

const PAR_MIN_ROWS: usize = 256;

/// Compressed sparse row matrix that also stores its transpose, so both
/// products are row gathers with a fixed summation order.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
    t_row_ptr: Vec<usize>,
    t_col_idx: Vec<u32>,
    t_values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row entry lists. Entries inside a row are summed per
    /// column in the order given and then sorted by column.
    pub fn from_rows(rows: usize, cols: usize, mut row_fn: impl FnMut(usize, &mut Vec<(u32, f64)>)) -> Self {
        let mut row_ptr = Vec::with_capacity(rows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut buf = Vec::new();
        for r in 0..rows {
            buf.clear();
            row_fn(r, &mut buf);
            merge_row(&mut buf);
            for &(c, v) in &buf {
                debug_assert!((c as usize) < cols);
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        let (t_row_ptr, t_col_idx, t_values) = transpose(rows, cols, &row_ptr, &col_idx, &values);
        Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
            t_row_ptr,
            t_col_idx,
            t_values,
        }
    }

    /// Builds from coordinate triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut by_row: Vec<Vec<(u32, f64)>> = vec![Vec::new(); rows];
        for &(r, c, v) in triplets {
            by_row[r].push((c as u32, v));
        }
        Self::from_rows(rows, cols, |r, buf| buf.extend_from_slice(&by_row[r]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c as usize, v))
        })
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|r| self.row(r).1.iter().sum()).collect()
    }
}

fn merge_row(buf: &mut Vec<(u32, f64)>) {
    if buf.len() < 2 {
        return;
    }
    buf.sort_by_key(|e| e.0);
    let mut w = 0;
    for i in 1..buf.len() {
        if buf[i].0 == buf[w].0 {
            buf[w].1 += buf[i].1;
        } else {
            w += 1;
            buf[w] = buf[i];
        }
    }
    buf.truncate(w + 1);
}

fn transpose(
    rows: usize,
    cols: usize,
    row_ptr: &[usize],
    col_idx: &[u32],
    values: &[f64],
) -> (Vec<usize>, Vec<u32>, Vec<f64>) {
    let mut counts = vec![0usize; cols + 1];
    for &c in col_idx {
        counts[c as usize + 1] += 1;
    }
    for c in 0..cols {
        counts[c + 1] += counts[c];
    }
    let t_row_ptr = counts.clone();
    let mut next = counts;
    let mut t_col_idx = vec![0u32; col_idx.len()];
    let mut t_values = vec![0.0; values.len()];
    for r in 0..rows {
        for k in row_ptr[r]..row_ptr[r + 1] {
            let c = col_idx[k] as usize;
            let slot = next[c];
            t_col_idx[slot] = r as u32;
            t_values[slot] = values[k];
            next[c] += 1;
        }
    }
    (t_row_ptr, t_col_idx, t_values)
}

fn gather(row_ptr: &[usize], col_idx: &[u32], values: &[f64], x: &[f64], out: &mut [f64]) {
    let row_dot = |r: usize| -> f64 {
        let mut acc = 0.0;
        for k in row_ptr[r]..row_ptr[r + 1] {
            acc += values[k] * x[col_idx[k] as usize];
        }
        acc
    };
    if out.len() >= PAR_MIN_ROWS {
        out.par_iter_mut().enumerate().for_each(|(r, o)| *o = row_dot(r));
    } else {
        out.iter_mut().enumerate().for_each(|(r, o)| *o = row_dot(r));
    }
}

impl LinearMap for CsrMatrix {
    fn domain_dim(&self) -> usize {
        self.cols
    }

    fn range_dim(&self) -> usize {
        self.rows
    }

    fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        gather(&self.row_ptr, &self.col_idx, &self.values, x, out);
    }

    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        gather(&self.t_row_ptr, &self.t_col_idx, &self.t_values, y, out);
    }
}
