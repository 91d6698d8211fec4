use crate::error::{Error, Result};

/// Square sparse matrix in compressed-row form whose entries are symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetricMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymmetricMatrix {
    /// Rows must list strictly increasing column indices.
    pub(crate) fn from_rows(dim: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        debug_assert_eq!(rows.len(), dim);
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        SparseSymmetricMatrix {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Sums duplicate triplets; rejects input that is not symmetric within `1e-12`.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for &(r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::InvalidArgument(format!("entry ({r}, {c}) outside {dim}x{dim}")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite entry at ({r}, {c})")));
            }
            rows[r].push((c, v));
        }
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
            row.dedup_by(|next, kept| {
                if next.0 == kept.0 {
                    kept.1 += next.1;
                    true
                } else {
                    false
                }
            });
        }
        let m = Self::from_rows(dim, rows);
        if m.max_asymmetry() > 1e-12 {
            return Err(Error::InvalidArgument("matrix is not symmetric".into()));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    /// All stored `(row, col, value)` entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[span.clone()].binary_search(&j) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let span = self.row_ptr[i]..self.row_ptr[i + 1];
            *o = self.cols[span.clone()]
                .iter()
                .zip(&self.vals[span])
                .map(|(&c, &v)| v * x[c])
                .sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// `xᵀ M x`
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim * self.dim];
        for (i, j, v) in self.entries() {
            d[i * self.dim + j] = v;
        }
        d
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.entries()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).map(|(_, v)| v).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }
}
